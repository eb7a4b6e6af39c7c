/** Scene renderer: console state in, one SVG document out.
 *
 * The output is a plain string so tests can compare frames byte for byte
 * against recorded goldens. Coordinates are formatted with a fixed number of
 * decimals to keep that comparison stable across platforms.
 */

import { forwardKinematics, WirePose } from "./fk.js";
import { Vec3, rotateVec, vecAdd, vecScale } from "./geom.js";
import { ConsoleState } from "./state.js";

export interface Camera {
  /** Rotation of the world about +z before projecting, radians. */
  yaw: number;
  /** Tilt toward the viewer about the screen-x axis, radians. */
  pitch: number;
  /** Pixels per meter. */
  scale: number;
  width: number;
  height: number;
  /** World point drawn at the canvas center. */
  focus: Vec3;
}

export const defaultCamera: Camera = {
  yaw: -0.6,
  pitch: 0.45,
  scale: 520,
  width: 960,
  height: 620,
  focus: [0.3, 0.0, 0.2],
};

const GIZMO_LENGTH = 0.07;
const AXIS_COLORS = ["#e05252", "#4caf50", "#4a7fe0"];

function fmt(value: number): string {
  // Guard against "-0.00" so goldens do not depend on the sign of zero.
  const s = value.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

function fmt3(value: number): string {
  const s = value.toFixed(3);
  return s === "-0.000" ? "0.000" : s;
}

export function project(p: Vec3, cam: Camera): [number, number] {
  const x = p[0] - cam.focus[0];
  const y = p[1] - cam.focus[1];
  const z = p[2] - cam.focus[2];
  const cy = Math.cos(cam.yaw);
  const sy = Math.sin(cam.yaw);
  const x1 = cy * x + sy * y;
  const y1 = -sy * x + cy * y;
  const cp = Math.cos(cam.pitch);
  const sp = Math.sin(cam.pitch);
  const v = cp * z - sp * y1;
  return [cam.width / 2 + cam.scale * x1, cam.height / 2 - cam.scale * v];
}

function svgOpen(cam: Camera): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${cam.width}" ` +
    `height="${cam.height}" viewBox="0 0 ${cam.width} ${cam.height}" ` +
    `font-family="monospace" font-size="13">` +
    `<rect width="${cam.width}" height="${cam.height}" fill="#11141a"/>`
  );
}

function line(a: [number, number], b: [number, number], attrs: string): string {
  return `<line x1="${fmt(a[0])}" y1="${fmt(a[1])}" x2="${fmt(b[0])}" y2="${fmt(b[1])}" ${attrs}/>`;
}

function circle(c: [number, number], r: number, attrs: string): string {
  return `<circle cx="${fmt(c[0])}" cy="${fmt(c[1])}" r="${r}" ${attrs}/>`;
}

function text(x: number, y: number, content: string, attrs = 'fill="#d8dee9"'): string {
  return `<text x="${fmt(x)}" y="${fmt(y)}" ${attrs}>${content}</text>`;
}

export function banner(message: string, cam: Camera = defaultCamera): string {
  return (
    svgOpen(cam) +
    `<rect x="${cam.width / 2 - 240}" y="${cam.height / 2 - 40}" width="480" height="80" ` +
    `rx="8" fill="#3b1f24" stroke="#e05252" data-part="banner"/>` +
    text(cam.width / 2 - 220, cam.height / 2 + 5, message, 'fill="#f0b7b7" font-size="16"') +
    `</svg>`
  );
}

function ground(cam: Camera): string {
  const parts: string[] = [];
  const attrs = 'stroke="#262c38" stroke-width="1"';
  for (let i = -2; i <= 6; i++) {
    const u = i * 0.1;
    parts.push(line(project([u, -0.4, 0], cam), project([u, 0.4, 0], cam), attrs));
  }
  for (let i = -4; i <= 4; i++) {
    const v = i * 0.1;
    parts.push(line(project([-0.2, v, 0], cam), project([0.6, v, 0], cam), attrs));
  }
  return parts.join("");
}

function poseTriad(pose: WirePose, cam: Camera, width: number, partName: string): string {
  const origin: Vec3 = [pose.p[0], pose.p[1], pose.p[2]];
  const q: [number, number, number, number] = [pose.q[0], pose.q[1], pose.q[2], pose.q[3]];
  const from = project(origin, cam);
  const axes: Vec3[] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
  ];
  let out = "";
  for (let i = 0; i < 3; i++) {
    const tip = vecAdd(origin, vecScale(rotateVec(q, axes[i]), GIZMO_LENGTH));
    out += line(
      from,
      project(tip, cam),
      `stroke="${AXIS_COLORS[i]}" stroke-width="${width}" data-part="${partName}-axis-${i}"`,
    );
  }
  return out;
}

export function renderScene(state: ConsoleState, cam: Camera = defaultCamera): string {
  if (state.connection === "closed") {
    return banner("connection lost", cam);
  }
  if (state.connection !== "open") {
    return banner("connecting to service", cam);
  }
  if (!state.session) {
    return banner("no model description from service", cam);
  }
  if (!state.snapshot) {
    return banner("waiting for first snapshot", cam);
  }

  const snap = state.snapshot;
  const session = state.session;
  const parts: string[] = [svgOpen(cam), ground(cam)];

  // Candidate cloud for the selected object, dimmed; shortlist ids brighter.
  const library = session.libraries.find((lib) => lib.object_id === state.selectedObject);
  const preview = snap.pipeline_preview;
  const shortlisted = new Set(preview ? preview.linear_ids : []);
  if (library) {
    for (const cand of library.candidates) {
      const at = project([cand.p[0], cand.p[1], cand.p[2]], cam);
      const hot = preview !== null && shortlisted.has(cand.id);
      parts.push(
        circle(
          at,
          hot ? 3 : 2,
          hot
            ? `fill="#caa94a" data-part="candidate-short" data-id="${cand.id}"`
            : `fill="#3a4152" data-part="candidate" data-id="${cand.id}"`,
        ),
      );
    }
  }

  // Manipulator drawn from the snapshot's joint configuration.
  const fk = forwardKinematics(session.model, snap.joint_configuration);
  const projected = fk.origins.map((o) => project(o, cam));
  for (let i = 0; i + 1 < projected.length; i++) {
    parts.push(
      line(projected[i], projected[i + 1], 'stroke="#7f8aa3" stroke-width="5" stroke-linecap="round"'),
    );
  }
  for (let i = 0; i < projected.length; i++) {
    parts.push(circle(projected[i], 4, 'fill="#aab4c8" data-part="joint"'));
  }

  // Selected grasp marker stays put while the effector converges onto it.
  if (snap.selected_grasp) {
    const pose = snap.selected_grasp.pose;
    const at = project([pose.p[0], pose.p[1], pose.p[2]], cam);
    parts.push(poseTriad(pose, cam, 2, "selected"));
    parts.push(
      circle(
        at,
        7,
        `fill="none" stroke="#f2c14e" stroke-width="3" data-part="selected-marker" ` +
          `data-x="${fmt(at[0])}" data-y="${fmt(at[1])}"`,
      ),
    );
  }

  // Commanded-pose gizmo.
  const ee = snap.commanded_pose;
  const eeAt = project([ee.p[0], ee.p[1], ee.p[2]], cam);
  parts.push(poseTriad(ee, cam, 3, "gizmo"));
  parts.push(
    circle(
      eeAt,
      5,
      `fill="#e8edf6" data-part="gizmo-center" data-x="${fmt(eeAt[0])}" data-y="${fmt(eeAt[1])}"`,
    ),
  );

  // HUD: mode badge, blending flag, role, object, metrics, notices.
  const modeColor = snap.mode === "manual" ? "#4caf50" : "#4a7fe0";
  parts.push(
    `<rect x="16" y="14" width="120" height="26" rx="6" fill="${modeColor}" data-part="mode-badge"/>`,
  );
  parts.push(text(28, 32, snap.mode.toUpperCase(), 'fill="#0c0e12" font-weight="bold"'));
  if (snap.blending_active) {
    parts.push(
      `<circle cx="160" cy="27" r="7" fill="#f2c14e" data-part="blending-indicator"/>`,
    );
    parts.push(text(174, 32, "blending"));
  }
  parts.push(text(16, 62, `role: ${state.role ?? "?"}`));
  parts.push(text(16, 80, `object: ${state.selectedObject ?? "-"}`));
  if (snap.selected_grasp) {
    parts.push(
      text(
        16,
        98,
        `grasp #${snap.selected_grasp.id} M=${fmt3(snap.selected_grasp.score.penalized)}`,
      ),
    );
  }

  const m = snap.metrics_so_far;
  const mx = cam.width - 250;
  parts.push(text(mx, 26, `tick ${snap.tick}`));
  parts.push(text(mx, 44, `path length    ${fmt3(m.path_length)} m`));
  parts.push(text(mx, 62, `orient travel  ${fmt3(m.orientation_travel)} rad`));
  parts.push(text(mx, 80, `elapsed        ${fmt3(m.completion_time)} s`));
  parts.push(text(mx, 98, `max kink       ${fmt3(m.max_step_heading_change)} rad`));

  for (let i = 0; i < state.notices.length; i++) {
    parts.push(
      text(16, cam.height - 14 - 18 * (state.notices.length - 1 - i), state.notices[i], 'fill="#9aa5bb"'),
    );
  }

  parts.push("</svg>");
  return parts.join("");
}
