/** Browser entry point: wires the socket client, input mapping, and renderer
 * to the page. All logic lives in the imported modules; this file is DOM glue.
 */

import { ConsoleClient, SocketLike } from "./client.js";
import { HandInput, defaultInputConfig } from "./input.js";
import { defaultCamera, renderScene } from "./render.js";
import { objectIds } from "./state.js";

function socketUrl(): string {
  const override = new URLSearchParams(window.location.search).get("server");
  if (override) {
    return override;
  }
  return "ws://127.0.0.1:8765/session";
}

function adapt(raw: WebSocket): SocketLike {
  const sock: SocketLike = {
    send: (data) => raw.send(data),
    close: () => raw.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
  };
  raw.onopen = () => sock.onopen?.();
  raw.onmessage = (event) => sock.onmessage?.({ data: event.data });
  raw.onclose = () => sock.onclose?.();
  return sock;
}

function start(): void {
  const scene = document.getElementById("scene");
  if (!scene) {
    throw new Error("missing #scene container");
  }

  let dirty = true;
  const client = new ConsoleClient(() => {
    dirty = true;
  });
  const hand = new HandInput(defaultInputConfig);
  client.attach(adapt(new WebSocket(socketUrl())));

  const inputContext = () => ({
    role: client.state.role,
    objects: objectIds(client.state),
    selectedObject: client.state.selectedObject,
  });

  const deliver = (result: { messages: ReturnType<HandInput["handle"]>["messages"]; notice: string | null }) => {
    for (const message of result.messages) {
      client.sendControl(message);
    }
    if (result.notice) {
      client.notice(result.notice);
    }
  };

  let dragging = false;
  scene.addEventListener("pointerdown", (event) => {
    dragging = true;
    (event.target as Element).setPointerCapture?.(event.pointerId);
  });
  scene.addEventListener("pointerup", () => {
    dragging = false;
  });
  scene.addEventListener("pointermove", (event) => {
    if (!dragging) {
      return;
    }
    deliver(
      hand.handle(
        {
          kind: "drag",
          dx: event.movementX,
          dy: -event.movementY,
          depth: event.shiftKey,
          orient: event.altKey,
        },
        inputContext(),
      ),
    );
  });
  window.addEventListener("keydown", (event) => {
    if (event.repeat) {
      return;
    }
    deliver(hand.handle({ kind: "key", key: event.key.toLowerCase() }, inputContext()));
  });

  const frame = () => {
    if (dirty) {
      dirty = false;
      scene.innerHTML = renderScene(client.state, defaultCamera);
    }
    window.requestAnimationFrame(frame);
  };
  window.requestAnimationFrame(frame);
}

start();
