/** Canvas rendering of a solved sketch.
 *
 * The witness assigns coordinates to every point (`P1.x`, `P1.y`, ...)
 * and line (`L1.a/.b/.c` as a normalized implicit form). Lines are
 * drawn as segments between the points incident to them; dimensional
 * constraints between two points are labeled at their midpoint. A small
 * square marks each vertex where two drawn segments meet at a right
 * angle. Without a witness, a placeholder message is drawn instead.
 */
import type { ConstraintReport, EntityReport, SystemPayload } from "./types.js";

interface Pt {
  x: number;
  y: number;
}

const RIGHT_ANGLE_TOL = 1e-6;

export function renderSketch(
  canvas: HTMLCanvasElement,
  system: SystemPayload,
  solution: Record<string, number> | null,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!solution) {
    ctx.fillStyle = "#888";
    ctx.font = "14px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("no solved configuration yet", canvas.width / 2, canvas.height / 2);
    return;
  }

  const points = collectPoints(system.entities, solution);
  const segments = collectSegments(system.constraints, points);
  const labels = collectLabels(system.constraints, system.assigned, points);
  const fit = fitViewport(points, canvas.width, canvas.height);

  ctx.lineWidth = 1.5;
  ctx.strokeStyle = "#2b6cb0";
  for (const [a, b] of segments) {
    ctx.beginPath();
    ctx.moveTo(...fit(a));
    ctx.lineTo(...fit(b));
    ctx.stroke();
  }

  ctx.strokeStyle = "#444";
  for (const marker of rightAngleMarkers(segments)) {
    drawRightAngle(ctx, fit, marker.corner, marker.dirA, marker.dirB, fit.scale);
  }

  ctx.fillStyle = "#c53030";
  for (const [id, p] of points) {
    const [cx, cy] = fit(p);
    ctx.beginPath();
    ctx.arc(cx, cy, 3.2, 0, 2 * Math.PI);
    ctx.fill();
    ctx.font = "12px sans-serif";
    ctx.textAlign = "left";
    ctx.fillText(id, cx + 5, cy - 5);
  }

  ctx.fillStyle = "#2f855a";
  ctx.font = "12px sans-serif";
  ctx.textAlign = "center";
  for (const label of labels) {
    const [lx, ly] = fit(label.at);
    ctx.fillText(label.text, lx, ly - 4);
  }
}

function collectPoints(
  entities: EntityReport[],
  solution: Record<string, number>,
): Map<string, Pt> {
  const points = new Map<string, Pt>();
  for (const e of entities) {
    if (e.type !== "point") continue;
    const x = solution[`${e.id}.x`];
    const y = solution[`${e.id}.y`];
    if (x !== undefined && y !== undefined) points.set(e.id, { x, y });
  }
  return points;
}

/** Segments to draw: for every line, the hull of its incident points;
 * plus every point-to-point dimensional constraint. */
function collectSegments(
  constraints: ConstraintReport[],
  points: Map<string, Pt>,
): Array<[Pt, Pt]> {
  const online = new Map<string, string[]>();
  const segments: Array<[Pt, Pt]> = [];
  for (const c of constraints) {
    if (c.type === "point_on_line" && c.between.length === 2) {
      const [pid, lid] = c.between;
      if (!online.has(lid)) online.set(lid, []);
      online.get(lid)!.push(pid);
    }
    if (c.type === "distance" && c.between.length === 2) {
      const a = points.get(c.between[0]);
      const b = points.get(c.between[1]);
      if (a && b) segments.push([a, b]);
    }
  }
  for (const ids of online.values()) {
    const pts = ids.map((id) => points.get(id)).filter((p): p is Pt => !!p);
    for (let i = 0; i + 1 < pts.length; i += 1) {
      segments.push([pts[i], pts[i + 1]]);
    }
  }
  return segments;
}

interface DimLabel {
  at: Pt;
  text: string;
}

function collectLabels(
  constraints: ConstraintReport[],
  assigned: Record<string, number>,
  points: Map<string, Pt>,
): DimLabel[] {
  const labels: DimLabel[] = [];
  for (const c of constraints) {
    if (!c.parameter || c.between.length !== 2) continue;
    const a = points.get(c.between[0]);
    const b = points.get(c.between[1]);
    if (!a || !b) continue;
    const value = assigned[c.parameter];
    const text = value === undefined ? c.parameter : `${c.parameter}=${round2(value)}`;
    labels.push({ at: { x: (a.x + b.x) / 2, y: (a.y + b.y) / 2 }, text });
  }
  return labels;
}

interface Marker {
  corner: Pt;
  dirA: Pt;
  dirB: Pt;
}

function rightAngleMarkers(segments: Array<[Pt, Pt]>): Marker[] {
  const markers: Marker[] = [];
  for (let i = 0; i < segments.length; i += 1) {
    for (let j = i + 1; j < segments.length; j += 1) {
      const shared = sharedEndpoint(segments[i], segments[j]);
      if (!shared) continue;
      const dirA = away(segments[i], shared);
      const dirB = away(segments[j], shared);
      const dot = dirA.x * dirB.x + dirA.y * dirB.y;
      if (Math.abs(dot) < RIGHT_ANGLE_TOL) {
        markers.push({ corner: shared, dirA, dirB });
      }
    }
  }
  return markers;
}

function sharedEndpoint(a: [Pt, Pt], b: [Pt, Pt]): Pt | null {
  for (const p of a) {
    for (const q of b) {
      if (Math.hypot(p.x - q.x, p.y - q.y) < 1e-9) return p;
    }
  }
  return null;
}

function away(seg: [Pt, Pt], from: Pt): Pt {
  const other = Math.hypot(seg[0].x - from.x, seg[0].y - from.y) < 1e-9 ? seg[1] : seg[0];
  const dx = other.x - from.x;
  const dy = other.y - from.y;
  const n = Math.hypot(dx, dy) || 1;
  return { x: dx / n, y: dy / n };
}

interface Fit {
  (p: Pt): [number, number];
  scale: number;
}

function fitViewport(points: Map<string, Pt>, width: number, height: number): Fit {
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const p of points.values()) {
    minX = Math.min(minX, p.x);
    maxX = Math.max(maxX, p.x);
    minY = Math.min(minY, p.y);
    maxY = Math.max(maxY, p.y);
  }
  if (!Number.isFinite(minX)) {
    minX = 0;
    maxX = 1;
    minY = 0;
    maxY = 1;
  }
  const spanX = Math.max(maxX - minX, 1e-9);
  const spanY = Math.max(maxY - minY, 1e-9);
  const margin = 40;
  const scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
  const fit = ((p: Pt): [number, number] => [
    margin + (p.x - minX) * scale,
    // canvas y grows downward; the sketch plane grows upward
    height - margin - (p.y - minY) * scale,
  ]) as Fit;
  fit.scale = scale;
  return fit;
}

function drawRightAngle(
  ctx: CanvasRenderingContext2D,
  fit: Fit,
  corner: Pt,
  dirA: Pt,
  dirB: Pt,
  scale: number,
): void {
  const s = 10 / Math.max(scale, 1e-9);
  const a = { x: corner.x + dirA.x * s, y: corner.y + dirA.y * s };
  const b = { x: corner.x + dirB.x * s, y: corner.y + dirB.y * s };
  const c = { x: corner.x + (dirA.x + dirB.x) * s, y: corner.y + (dirA.y + dirB.y) * s };
  ctx.beginPath();
  ctx.moveTo(...fit(a));
  ctx.lineTo(...fit(c));
  ctx.lineTo(...fit(b));
  ctx.stroke();
}

function round2(x: number): number {
  return Math.round(x * 100) / 100;
}
