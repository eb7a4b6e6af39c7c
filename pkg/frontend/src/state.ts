/** Console state: the latest snapshot plus connection bookkeeping.
 *
 * Rendering derives from this state alone. There is deliberately no
 * client-side simulation; the displayed pose is always the snapshot's
 * commanded pose, byte for byte.
 */

import { WirePose } from "./fk.js";
import { ServerFrame, SessionDescription, Snapshot } from "./protocol.js";

export type Connection = "connecting" | "open" | "closed";

export interface ConsoleState {
  connection: Connection;
  role: "operator" | "observer" | null;
  session: SessionDescription | null;
  snapshot: Snapshot | null;
  selectedObject: string | null;
  notices: string[];
  lastError: string | null;
}

export type ConsoleEvent =
  | { kind: "connection"; status: Connection }
  | { kind: "frame"; frame: ServerFrame }
  | { kind: "notice"; text: string }
  | { kind: "object_selected"; objectId: string };

const MAX_NOTICES = 6;

export function initialState(): ConsoleState {
  return {
    connection: "connecting",
    role: null,
    session: null,
    snapshot: null,
    selectedObject: null,
    notices: [],
    lastError: null,
  };
}

function withNotice(state: ConsoleState, text: string): ConsoleState {
  return { ...state, notices: [...state.notices, text].slice(-MAX_NOTICES) };
}

export function reduce(state: ConsoleState, event: ConsoleEvent): ConsoleState {
  switch (event.kind) {
    case "connection":
      return { ...state, connection: event.status };
    case "notice":
      return withNotice(state, event.text);
    case "object_selected":
      return { ...state, selectedObject: event.objectId };
    case "frame":
      return reduceFrame(state, event.frame);
  }
}

function reduceFrame(state: ConsoleState, frame: ServerFrame): ConsoleState {
  switch (frame.type) {
    case "role":
      return { ...state, role: frame.payload.role };
    case "snapshot":
      return { ...state, snapshot: frame.payload };
    case "model_description": {
      const selected =
        state.selectedObject ?? frame.payload.libraries[0]?.object_id ?? null;
      return { ...state, session: frame.payload, selectedObject: selected };
    }
    case "error":
      return {
        ...withNotice(state, `service: ${frame.payload.message}`),
        lastError: frame.payload.message,
      };
  }
}

/** The pose the console shows for the effector: exactly the snapshot's. */
export function displayedPose(state: ConsoleState): WirePose | null {
  return state.snapshot ? state.snapshot.commanded_pose : null;
}

export function currentSnapshot(state: ConsoleState): Snapshot | null {
  return state.snapshot;
}

export function objectIds(state: ConsoleState): string[] {
  return state.session ? state.session.libraries.map((lib) => lib.object_id) : [];
}
