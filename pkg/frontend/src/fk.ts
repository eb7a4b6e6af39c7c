/** Client-side forward kinematics over the served robot description.
 *
 * The console draws the arm from each snapshot's joint configuration without
 * asking the service for link positions, so this must agree with the
 * simulation's own kinematics: standard DH rows composed between the base and
 * tool frames.
 */

import {
  Mat4,
  Quat,
  Vec3,
  dhMatrix,
  mat4FromPose,
  mat4Multiply,
  mat4Origin,
  mat4Rotation,
  matrixToQuat,
  quatNormalize,
} from "./geom.js";

export interface WirePose {
  p: number[];
  q: number[];
}

export interface JointDescription {
  a: number;
  alpha: number;
  d: number;
  theta_offset: number;
  min: number;
  max: number;
}

export interface ModelDescription {
  name: string;
  joints: JointDescription[];
  base: WirePose;
  tool: WirePose;
  task_rows: number[];
}

export interface FkResult {
  /** Frame origins: base, then each joint frame, then the tool point. */
  origins: Vec3[];
  position: Vec3;
  orientation: Quat;
}

export function poseMatrix(pose: WirePose): Mat4 {
  const p: Vec3 = [pose.p[0], pose.p[1], pose.p[2]];
  const q = quatNormalize([pose.q[0], pose.q[1], pose.q[2], pose.q[3]]);
  return mat4FromPose(p, q);
}

export function forwardKinematics(model: ModelDescription, theta: number[]): FkResult {
  if (theta.length !== model.joints.length) {
    throw new Error(
      `expected ${model.joints.length} joint angles, got ${theta.length}`,
    );
  }
  const origins: Vec3[] = [];
  let T = poseMatrix(model.base);
  origins.push(mat4Origin(T));
  for (let i = 0; i < model.joints.length; i++) {
    const j = model.joints[i];
    T = mat4Multiply(T, dhMatrix(j.a, j.alpha, j.d, theta[i] + j.theta_offset));
    origins.push(mat4Origin(T));
  }
  T = mat4Multiply(T, poseMatrix(model.tool));
  origins.push(mat4Origin(T));
  return {
    origins,
    position: mat4Origin(T),
    orientation: matrixToQuat(mat4Rotation(T)),
  };
}
