/** Desk input in place of a tracked controller.
 *
 * The console keeps a virtual hand pose. Pointer drags nudge it inside a
 * configured 2D plane (a modifier key redirects vertical drag to the plane's
 * normal for depth), a second modifier turns drags into orientation nudges,
 * and single keys fire the discrete actions. Every accepted input produces
 * wire messages; observers get a local notice and nothing is sent.
 */

import { Quat, Vec3, quatFromAxisAngle, quatMultiply, quatNormalize } from "./geom.js";
import { ClientMessage } from "./protocol.js";

export interface InputConfig {
  /** Meters of hand translation per pixel of drag. */
  positionScale: number;
  /** Radians of hand rotation per pixel of drag. */
  orientationScale: number;
  /** Which world plane plain drags move in; the third axis is depth. */
  plane: "xy" | "xz";
  toggleKey: string;
  gripKey: string;
  cycleObjectKey: string;
}

export const defaultInputConfig: InputConfig = {
  positionScale: 0.002,
  orientationScale: 0.008,
  plane: "xy",
  toggleKey: "m",
  gripKey: "g",
  cycleObjectKey: "o",
};

export type InputAction =
  | { kind: "drag"; dx: number; dy: number; depth: boolean; orient: boolean }
  | { kind: "key"; key: string };

export interface InputContext {
  role: "operator" | "observer" | null;
  objects: string[];
  selectedObject: string | null;
}

export interface InputResult {
  messages: ClientMessage[];
  notice: string | null;
}

const PLANE_AXES: Record<"xy" | "xz", [number, number, number]> = {
  // [axis of dx, axis of dy, depth axis] as indices into (x, y, z).
  xy: [0, 1, 2],
  xz: [0, 2, 1],
};

export class HandInput {
  position: Vec3;
  orientation: Quat;

  constructor(
    readonly config: InputConfig = defaultInputConfig,
    start?: { position: Vec3; orientation: Quat },
  ) {
    this.position = start ? [...start.position] : [0, 0, 0];
    this.orientation = start ? [...start.orientation] : [1, 0, 0, 0];
  }

  handle(action: InputAction, ctx: InputContext): InputResult {
    if (ctx.role !== "operator") {
      return { messages: [], notice: "observer: inputs are not sent" };
    }
    if (action.kind === "drag") {
      return { messages: [this.applyDrag(action)], notice: null };
    }
    return this.applyKey(action.key, ctx);
  }

  private applyDrag(action: {
    dx: number;
    dy: number;
    depth: boolean;
    orient: boolean;
  }): ClientMessage {
    if (action.orient) {
      const yaw = quatFromAxisAngle([0, 0, 1], this.config.orientationScale * action.dx);
      const pitch = quatFromAxisAngle([1, 0, 0], this.config.orientationScale * action.dy);
      this.orientation = quatNormalize(
        quatMultiply(quatMultiply(yaw, pitch), this.orientation),
      );
    } else {
      const [ax, ay, az] = PLANE_AXES[this.config.plane];
      const s = this.config.positionScale;
      this.position[ax] += s * action.dx;
      if (action.depth) {
        this.position[az] += s * action.dy;
      } else {
        this.position[ay] += s * action.dy;
      }
    }
    return {
      type: "hand_pose",
      payload: { p: [...this.position], q: [...this.orientation] },
    };
  }

  private applyKey(key: string, ctx: InputContext): InputResult {
    if (key === this.config.toggleKey) {
      return { messages: [{ type: "toggle_mode", payload: {} }], notice: null };
    }
    if (key === this.config.gripKey) {
      return { messages: [{ type: "grip", payload: {} }], notice: null };
    }
    if (key === this.config.cycleObjectKey) {
      if (ctx.objects.length === 0) {
        return { messages: [], notice: "no objects loaded" };
      }
      const at = ctx.selectedObject ? ctx.objects.indexOf(ctx.selectedObject) : -1;
      const next = ctx.objects[(at + 1) % ctx.objects.length];
      return {
        messages: [{ type: "select_object", payload: { object_id: next } }],
        notice: null,
      };
    }
    return { messages: [], notice: null };
  }
}
