/** Wire protocol spoken with the teleoperation service.
 *
 * Everything is JSON text in an envelope {type, seq, payload}. The console
 * validates inbound frames structurally before trusting them; anything
 * off-schema raises ProtocolError with a reason naming the offending field.
 */

import { ModelDescription, WirePose } from "./fk.js";

export type Mode = "manual" | "automatic";

export interface MotionMetrics {
  path_length: number;
  orientation_travel: number;
  completion_time: number;
  max_step_heading_change: number;
}

export interface SelectedGrasp {
  object_id: string;
  id: number;
  pose: WirePose;
  score: { yoshikawa: number; limit_margin: number; penalized: number };
}

export interface PipelinePreview {
  object_id: string;
  chosen_id: number;
  penalized: number;
  angular_ids: number[];
  linear_ids: number[];
  ik_failures: number[];
}

export interface Snapshot {
  tick: number;
  mode: Mode;
  commanded_pose: WirePose;
  joint_configuration: number[];
  selected_grasp: SelectedGrasp | null;
  pipeline_preview: PipelinePreview | null;
  metrics_so_far: MotionMetrics;
  blending_active: boolean;
}

export interface LibrarySummary {
  object_id: string;
  candidates: { id: number; p: number[]; q: number[] }[];
}

export interface SessionDescription {
  model: ModelDescription;
  libraries: LibrarySummary[];
  speed: number;
  sample_rate: number;
  selection: { k_angular: number; k_linear: number };
  alpha: number;
}

export type ServerFrame =
  | { type: "role"; seq: number; payload: { role: "operator" | "observer" } }
  | { type: "snapshot"; seq: number; payload: Snapshot }
  | { type: "error"; seq: number; payload: { message: string; in_reply_to: number | null } }
  | { type: "model_description"; seq: number; payload: SessionDescription };

export type ClientMessage =
  | { type: "hand_pose"; payload: { p: number[]; q: number[] } }
  | { type: "toggle_mode"; payload: Record<string, never> }
  | { type: "grip"; payload: Record<string, never> }
  | { type: "select_object"; payload: { object_id: string } }
  | {
      type: "set_config";
      payload: { alpha?: number; k_angular?: number; k_linear?: number };
    }
  | { type: "model_description"; payload: Record<string, never> };

export class ProtocolError extends Error {}

function fail(reason: string): never {
  throw new ProtocolError(reason);
}

function isRecord(x: unknown): x is Record<string, unknown> {
  return typeof x === "object" && x !== null && !Array.isArray(x);
}

function checkFinite(x: unknown, name: string): number {
  if (typeof x !== "number" || !Number.isFinite(x)) {
    fail(`${name} must be a finite number`);
  }
  return x;
}

function checkNumbers(x: unknown, name: string, length?: number): number[] {
  if (!Array.isArray(x)) {
    fail(`${name} must be an array of numbers`);
  }
  if (length !== undefined && x.length !== length) {
    fail(`${name} must have length ${length}`);
  }
  return x.map((v, i) => checkFinite(v, `${name}[${i}]`));
}

function checkPose(x: unknown, name: string): WirePose {
  if (!isRecord(x)) {
    fail(`${name} must be an object with p and q`);
  }
  return { p: checkNumbers(x.p, `${name}.p`, 3), q: checkNumbers(x.q, `${name}.q`, 4) };
}

function checkString(x: unknown, name: string): string {
  if (typeof x !== "string") {
    fail(`${name} must be a string`);
  }
  return x;
}

function checkSelectedGrasp(x: unknown): SelectedGrasp | null {
  if (x === null) {
    return null;
  }
  if (!isRecord(x) || !isRecord(x.score)) {
    fail("selected_grasp must be null or an object with a score");
  }
  return {
    object_id: checkString(x.object_id, "selected_grasp.object_id"),
    id: checkFinite(x.id, "selected_grasp.id"),
    pose: checkPose(x.pose, "selected_grasp.pose"),
    score: {
      yoshikawa: checkFinite(x.score.yoshikawa, "score.yoshikawa"),
      limit_margin: checkFinite(x.score.limit_margin, "score.limit_margin"),
      penalized: checkFinite(x.score.penalized, "score.penalized"),
    },
  };
}

function checkPreview(x: unknown): PipelinePreview | null {
  if (x === null) {
    return null;
  }
  if (!isRecord(x)) {
    fail("pipeline_preview must be null or an object");
  }
  return {
    object_id: checkString(x.object_id, "pipeline_preview.object_id"),
    chosen_id: checkFinite(x.chosen_id, "pipeline_preview.chosen_id"),
    penalized: checkFinite(x.penalized, "pipeline_preview.penalized"),
    angular_ids: checkNumbers(x.angular_ids, "pipeline_preview.angular_ids"),
    linear_ids: checkNumbers(x.linear_ids, "pipeline_preview.linear_ids"),
    ik_failures: checkNumbers(x.ik_failures, "pipeline_preview.ik_failures"),
  };
}

function checkSnapshot(x: unknown): Snapshot {
  if (!isRecord(x) || !isRecord(x.metrics_so_far)) {
    fail("snapshot payload must be an object with metrics_so_far");
  }
  const mode = checkString(x.mode, "snapshot.mode");
  if (mode !== "manual" && mode !== "automatic") {
    fail(`snapshot.mode must be manual or automatic, got ${mode}`);
  }
  if (typeof x.blending_active !== "boolean") {
    fail("snapshot.blending_active must be a boolean");
  }
  const m = x.metrics_so_far;
  return {
    tick: checkFinite(x.tick, "snapshot.tick"),
    mode,
    commanded_pose: checkPose(x.commanded_pose, "snapshot.commanded_pose"),
    joint_configuration: checkNumbers(x.joint_configuration, "snapshot.joint_configuration"),
    selected_grasp: checkSelectedGrasp(x.selected_grasp),
    pipeline_preview: checkPreview(x.pipeline_preview),
    metrics_so_far: {
      path_length: checkFinite(m.path_length, "metrics.path_length"),
      orientation_travel: checkFinite(m.orientation_travel, "metrics.orientation_travel"),
      completion_time: checkFinite(m.completion_time, "metrics.completion_time"),
      max_step_heading_change: checkFinite(
        m.max_step_heading_change,
        "metrics.max_step_heading_change",
      ),
    },
    blending_active: x.blending_active,
  };
}

function checkModel(x: unknown): ModelDescription {
  if (!isRecord(x) || !Array.isArray(x.joints)) {
    fail("model must be an object with a joints array");
  }
  return {
    name: checkString(x.name, "model.name"),
    joints: x.joints.map((j, i) => {
      if (!isRecord(j)) {
        fail(`model.joints[${i}] must be an object`);
      }
      return {
        a: checkFinite(j.a, `joints[${i}].a`),
        alpha: checkFinite(j.alpha, `joints[${i}].alpha`),
        d: checkFinite(j.d, `joints[${i}].d`),
        theta_offset: checkFinite(j.theta_offset, `joints[${i}].theta_offset`),
        min: checkFinite(j.min, `joints[${i}].min`),
        max: checkFinite(j.max, `joints[${i}].max`),
      };
    }),
    base: checkPose(x.base, "model.base"),
    tool: checkPose(x.tool, "model.tool"),
    task_rows: checkNumbers(x.task_rows, "model.task_rows"),
  };
}

function checkDescription(x: unknown): SessionDescription {
  if (!isRecord(x) || !Array.isArray(x.libraries) || !isRecord(x.selection)) {
    fail("model_description payload must carry model, libraries, selection");
  }
  return {
    model: checkModel(x.model),
    libraries: x.libraries.map((lib, i) => {
      if (!isRecord(lib) || !Array.isArray(lib.candidates)) {
        fail(`libraries[${i}] must be an object with candidates`);
      }
      return {
        object_id: checkString(lib.object_id, `libraries[${i}].object_id`),
        candidates: lib.candidates.map((c, k) => {
          if (!isRecord(c)) {
            fail(`libraries[${i}].candidates[${k}] must be an object`);
          }
          return {
            id: checkFinite(c.id, "candidate.id"),
            p: checkNumbers(c.p, "candidate.p", 3),
            q: checkNumbers(c.q, "candidate.q", 4),
          };
        }),
      };
    }),
    speed: checkFinite(x.speed, "description.speed"),
    sample_rate: checkFinite(x.sample_rate, "description.sample_rate"),
    selection: {
      k_angular: checkFinite(x.selection.k_angular, "selection.k_angular"),
      k_linear: checkFinite(x.selection.k_linear, "selection.k_linear"),
    },
    alpha: checkFinite(x.alpha, "description.alpha"),
  };
}

export function parseServerFrame(text: string): ServerFrame {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    fail(`frame is not valid JSON: ${String(err)}`);
  }
  if (!isRecord(raw)) {
    fail("frame must be a JSON object");
  }
  const seq = checkFinite(raw.seq, "frame.seq");
  const type = checkString(raw.type, "frame.type");
  switch (type) {
    case "role": {
      if (!isRecord(raw.payload)) {
        fail("role payload must be an object");
      }
      const role = checkString(raw.payload.role, "role.payload.role");
      if (role !== "operator" && role !== "observer") {
        fail(`unknown role ${role}`);
      }
      return { type, seq, payload: { role } };
    }
    case "snapshot":
      return { type, seq, payload: checkSnapshot(raw.payload) };
    case "error": {
      if (!isRecord(raw.payload)) {
        fail("error payload must be an object");
      }
      const replyTo = raw.payload.in_reply_to;
      return {
        type,
        seq,
        payload: {
          message: checkString(raw.payload.message, "error.payload.message"),
          in_reply_to: replyTo === null ? null : checkFinite(replyTo, "error.in_reply_to"),
        },
      };
    }
    case "model_description":
      return { type, seq, payload: checkDescription(raw.payload) };
    default:
      fail(`unknown frame type ${type}`);
  }
}

export function envelope(message: ClientMessage, seq: number): string {
  return JSON.stringify({ type: message.type, seq, payload: message.payload });
}
