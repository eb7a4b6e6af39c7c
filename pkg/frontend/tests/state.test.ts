import { describe, expect, it } from "vitest";

import { ServerFrame } from "../src/protocol.js";
import {
  ConsoleState,
  displayedPose,
  initialState,
  objectIds,
  reduce,
} from "../src/state.js";
import { loadStream } from "./helpers/stream.js";

const { frames, description, snapshots } = loadStream();

function foldFrames(count: number): ConsoleState {
  let state = reduce(initialState(), { kind: "connection", status: "open" });
  for (const frame of frames.slice(0, count)) {
    state = reduce(state, { kind: "frame", frame });
  }
  return state;
}

/** State after only the role and description frames, no snapshots. */
function foldIntroduction(): ConsoleState {
  let state = reduce(initialState(), { kind: "connection", status: "open" });
  for (const frame of frames) {
    if (frame.type === "role" || frame.type === "model_description") {
      state = reduce(state, { kind: "frame", frame });
    }
  }
  return state;
}

describe("state reduction", () => {
  it("starts connecting with nothing known", () => {
    const state = initialState();
    expect(state.connection).toBe("connecting");
    expect(state.role).toBeNull();
    expect(state.session).toBeNull();
    expect(state.snapshot).toBeNull();
    expect(state.notices).toEqual([]);
  });

  it("tracks connection status transitions", () => {
    let state = initialState();
    state = reduce(state, { kind: "connection", status: "open" });
    expect(state.connection).toBe("open");
    state = reduce(state, { kind: "connection", status: "closed" });
    expect(state.connection).toBe("closed");
  });

  it("adopts the role frame", () => {
    const state = foldFrames(1);
    expect(state.role).toBe("operator");
  });

  it("adopts the session description and defaults the selected object", () => {
    const state = foldIntroduction();
    expect(state.session).not.toBeNull();
    expect(state.selectedObject).toBe("demo");
  });

  it("keeps an explicit object selection across description refreshes", () => {
    let state = foldIntroduction();
    state = reduce(state, { kind: "object_selected", objectId: "other" });
    const descFrame = frames.find((f) => f.type === "model_description");
    state = reduce(state, { kind: "frame", frame: descFrame as ServerFrame });
    expect(state.selectedObject).toBe("other");
  });

  it("replaces the snapshot with each new frame", () => {
    const state = foldFrames(frames.length);
    expect(state.snapshot).toBe(snapshots[snapshots.length - 1]);
  });

  it("turns error frames into notices and remembers the last one", () => {
    let state = foldFrames(3);
    const error: ServerFrame = {
      type: "error",
      seq: 9,
      payload: { message: "observers cannot send control messages", in_reply_to: 4 },
    };
    state = reduce(state, { kind: "frame", frame: error });
    expect(state.lastError).toBe("observers cannot send control messages");
    expect(state.notices[state.notices.length - 1]).toBe(
      "service: observers cannot send control messages",
    );
  });

  it("caps the notice backlog at its display budget", () => {
    let state = initialState();
    for (let i = 0; i < 9; i++) {
      state = reduce(state, { kind: "notice", text: `note ${i}` });
    }
    expect(state.notices.length).toBe(6);
    expect(state.notices[0]).toBe("note 3");
    expect(state.notices[5]).toBe("note 8");
  });
});

describe("derived views", () => {
  it("shows exactly the snapshot's commanded pose, no client prediction", () => {
    const state = foldFrames(frames.length);
    expect(displayedPose(state)).toBe(state.snapshot?.commanded_pose);
  });

  it("shows nothing before the first snapshot", () => {
    expect(displayedPose(foldIntroduction())).toBeNull();
  });

  it("lists object ids from the session description", () => {
    expect(objectIds(foldIntroduction())).toEqual(
      description.libraries.map((lib) => lib.object_id),
    );
    expect(objectIds(initialState())).toEqual([]);
  });
});
