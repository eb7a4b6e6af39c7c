/** Minimal rigid-body math mirroring the service's conventions.
 *
 * Quaternions are (w, x, y, z), matrices are row-major nested arrays, and the
 * canonical quaternion sign is w > 0 (first nonzero of x, y, z positive when
 * w is 0), matching what the service serializes.
 */

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number];
export type Mat4 = number[][];

export function vecAdd(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function vecSub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function vecScale(a: Vec3, s: number): Vec3 {
  return [a[0] * s, a[1] * s, a[2] * s];
}

export function vecNorm(a: Vec3): number {
  return Math.hypot(a[0], a[1], a[2]);
}

export function quatNormalize(q: Quat): Quat {
  const n = Math.hypot(q[0], q[1], q[2], q[3]);
  if (!(n > 1e-12)) {
    throw new Error("quaternion norm is too small to normalize");
  }
  // Skip the division when already unit-norm so repeated wrapping is exact.
  if (Math.abs(n - 1.0) <= 1e-9) {
    return [q[0], q[1], q[2], q[3]];
  }
  return [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
}

export function quatCanonical(q: Quat): Quat {
  let flip = q[0] < 0;
  if (q[0] === 0) {
    for (const c of [q[1], q[2], q[3]]) {
      if (c !== 0) {
        flip = c < 0;
        break;
      }
    }
  }
  return flip ? [-q[0], -q[1], -q[2], -q[3]] : [q[0], q[1], q[2], q[3]];
}

/** Hamilton product a * b (apply b's rotation first, then a's). */
export function quatMultiply(a: Quat, b: Quat): Quat {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return [
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ];
}

export function quatFromAxisAngle(axis: Vec3, angle: number): Quat {
  const n = vecNorm(axis);
  if (!(n > 1e-12)) {
    throw new Error("rotation axis must be nonzero");
  }
  const half = angle / 2;
  const s = Math.sin(half) / n;
  return quatNormalize([Math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s]);
}

export function quatToMatrix3(q: Quat): number[][] {
  const [w, x, y, z] = q;
  return [
    [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
    [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
    [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
  ];
}

/** Shepperd's branch selection, canonical sign. */
export function matrixToQuat(R: number[][]): Quat {
  const tr = R[0][0] + R[1][1] + R[2][2];
  let q: Quat;
  if (tr > 0) {
    const s = 2 * Math.sqrt(tr + 1);
    q = [0.25 * s, (R[2][1] - R[1][2]) / s, (R[0][2] - R[2][0]) / s, (R[1][0] - R[0][1]) / s];
  } else if (R[0][0] >= R[1][1] && R[0][0] >= R[2][2]) {
    const s = 2 * Math.sqrt(1 + R[0][0] - R[1][1] - R[2][2]);
    q = [(R[2][1] - R[1][2]) / s, 0.25 * s, (R[0][1] + R[1][0]) / s, (R[0][2] + R[2][0]) / s];
  } else if (R[1][1] >= R[2][2]) {
    const s = 2 * Math.sqrt(1 + R[1][1] - R[0][0] - R[2][2]);
    q = [(R[0][2] - R[2][0]) / s, (R[0][1] + R[1][0]) / s, 0.25 * s, (R[1][2] + R[2][1]) / s];
  } else {
    const s = 2 * Math.sqrt(1 + R[2][2] - R[0][0] - R[1][1]);
    q = [(R[1][0] - R[0][1]) / s, (R[0][2] + R[2][0]) / s, (R[1][2] + R[2][1]) / s, 0.25 * s];
  }
  return quatCanonical(quatNormalize(q));
}

export function rotateVec(q: Quat, v: Vec3): Vec3 {
  const R = quatToMatrix3(q);
  return [
    R[0][0] * v[0] + R[0][1] * v[1] + R[0][2] * v[2],
    R[1][0] * v[0] + R[1][1] * v[1] + R[1][2] * v[2],
    R[2][0] * v[0] + R[2][1] * v[1] + R[2][2] * v[2],
  ];
}

/** Chord distance between rotations, insensitive to quaternion sign. */
export function angularChord(qa: Quat, qb: Quat): number {
  let sum = 0;
  let diff = 0;
  for (let i = 0; i < 4; i++) {
    sum += (qa[i] + qb[i]) ** 2;
    diff += (qa[i] - qb[i]) ** 2;
  }
  return Math.sqrt(Math.min(sum, diff));
}

export function mat4Identity(): Mat4 {
  return [
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 1, 0],
    [0, 0, 0, 1],
  ];
}

export function mat4Multiply(A: Mat4, B: Mat4): Mat4 {
  const out: Mat4 = [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]];
  for (let i = 0; i < 4; i++) {
    for (let j = 0; j < 4; j++) {
      let acc = 0;
      for (let k = 0; k < 4; k++) {
        acc += A[i][k] * B[k][j];
      }
      out[i][j] = acc;
    }
  }
  return out;
}

export function mat4FromPose(p: Vec3, q: Quat): Mat4 {
  const R = quatToMatrix3(q);
  return [
    [R[0][0], R[0][1], R[0][2], p[0]],
    [R[1][0], R[1][1], R[1][2], p[1]],
    [R[2][0], R[2][1], R[2][2], p[2]],
    [0, 0, 0, 1],
  ];
}

/** One joint's transform: RotZ(theta) . TransZ(d) . TransX(a) . RotX(alpha). */
export function dhMatrix(a: number, alpha: number, d: number, theta: number): Mat4 {
  const ct = Math.cos(theta);
  const st = Math.sin(theta);
  const ca = Math.cos(alpha);
  const sa = Math.sin(alpha);
  return [
    [ct, -st * ca, st * sa, a * ct],
    [st, ct * ca, -ct * sa, a * st],
    [0, sa, ca, d],
    [0, 0, 0, 1],
  ];
}

export function mat4Origin(T: Mat4): Vec3 {
  return [T[0][3], T[1][3], T[2][3]];
}

export function mat4Rotation(T: Mat4): number[][] {
  return [
    [T[0][0], T[0][1], T[0][2]],
    [T[1][0], T[1][1], T[1][2]],
    [T[2][0], T[2][1], T[2][2]],
  ];
}
