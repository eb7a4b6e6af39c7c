/** Socket client: frames in, state events out, control messages guarded.
 *
 * The socket is injected through a minimal structural interface so unit tests
 * can drive the client with a scripted fake and the browser/node entry points
 * can adapt their own WebSocket objects.
 */

import { ClientMessage, ProtocolError, envelope, parseServerFrame } from "./protocol.js";
import { ConsoleState, initialState, reduce } from "./state.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
}

export class ConsoleClient {
  state: ConsoleState = initialState();
  private socket: SocketLike | null = null;
  private seq = 0;

  constructor(private readonly onChange: (state: ConsoleState) => void = () => {}) {}

  /** seq of the next outbound message; exposed for monotonicity checks. */
  get nextSeq(): number {
    return this.seq;
  }

  attach(socket: SocketLike): void {
    this.socket = socket;
    socket.onopen = () => {
      this.dispatch({ kind: "connection", status: "open" });
      // One description request per connection; the scene cannot render
      // without the model, so ask before any input happens.
      this.sendRaw({ type: "model_description", payload: {} });
    };
    socket.onmessage = (event) => {
      this.handleFrame(String(event.data));
    };
    socket.onclose = () => {
      this.dispatch({ kind: "connection", status: "closed" });
    };
  }

  handleFrame(text: string): void {
    try {
      const frame = parseServerFrame(text);
      this.dispatch({ kind: "frame", frame });
    } catch (err) {
      if (err instanceof ProtocolError) {
        this.dispatch({ kind: "notice", text: `bad frame: ${err.message}` });
        return;
      }
      throw err;
    }
  }

  /** Send a control message; observers get a notice instead. */
  sendControl(message: ClientMessage): boolean {
    if (this.state.role !== "operator") {
      this.dispatch({ kind: "notice", text: "not the operator; message not sent" });
      return false;
    }
    this.sendRaw(message);
    if (message.type === "select_object") {
      this.dispatch({ kind: "object_selected", objectId: message.payload.object_id });
    }
    return true;
  }

  notice(text: string): void {
    this.dispatch({ kind: "notice", text });
  }

  private sendRaw(message: ClientMessage): void {
    if (!this.socket) {
      throw new Error("client is not attached to a socket");
    }
    this.socket.send(envelope(message, this.seq));
    this.seq += 1;
  }

  private dispatch(event: Parameters<typeof reduce>[1]): void {
    this.state = reduce(this.state, event);
    this.onChange(this.state);
  }
}
