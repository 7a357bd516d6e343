/** Pure interval logic: the client-side mirror of server validation,
 * plus the geometry of the number-line display.
 *
 * The guard must agree with the server so the UI never submits a value
 * it renders as invalid; the server stays authoritative regardless.
 */
import type { IntervalReport } from "./types.js";

/** Relative slack applied at closed bounds, matching the server. */
const MEMBER_RTOL = 1e-9;

export function intervalContains(iv: IntervalReport, value: number): boolean {
  let slack = MEMBER_RTOL * Math.max(1.0, Math.abs(iv.lo));
  if (iv.loClosed) {
    if (value < iv.lo - slack) return false;
  } else if (value <= iv.lo) {
    return false;
  }
  if (iv.hi === null) return true;
  slack = MEMBER_RTOL * Math.max(1.0, Math.abs(iv.hi));
  return iv.hiClosed ? value <= iv.hi + slack : value < iv.hi;
}

export function rangeContains(intervals: IntervalReport[], value: number): boolean {
  return intervals.some((iv) => intervalContains(iv, value));
}

/** Nearest in-range value: out-of-range drags snap to an interval edge.
 * Open edges snap to a point just inside; an empty range yields NaN. */
export function snapToRange(intervals: IntervalReport[], value: number): number {
  if (rangeContains(intervals, value)) return value;
  let best = Number.NaN;
  let bestDist = Infinity;
  for (const iv of intervals) {
    const width = iv.hi === null ? 1.0 : Math.max(iv.hi - iv.lo, 1e-6);
    const inset = Math.min(1e-6, width / 2);
    const lo = iv.loClosed ? iv.lo : iv.lo + inset;
    const hi = iv.hi === null ? Infinity : iv.hiClosed ? iv.hi : iv.hi - inset;
    const candidate = Math.min(Math.max(value, lo), hi);
    const dist = Math.abs(candidate - value);
    if (dist < bestDist) {
      bestDist = dist;
      best = candidate;
    }
  }
  return best;
}

export function formatInterval(iv: IntervalReport): string {
  const lo = `${iv.loClosed ? "[" : "("}${compact(iv.lo)}`;
  if (iv.hi === null) return `${lo}, +inf)`;
  return `${lo}, ${compact(iv.hi)}${iv.hiClosed ? "]" : ")"}`;
}

export function formatRange(intervals: IntervalReport[]): string {
  return intervals.map(formatInterval).join(" u ") || "(empty)";
}

function compact(x: number): string {
  const rounded = Math.round(x * 1e6) / 1e6;
  return String(rounded);
}

/** The widget's display window and the drawable fate of each interval. */
export interface NumberLineScale {
  /** Domain shown on the line, left edge. */
  min: number;
  /** Right edge of the shown domain: the soft cap when unbounded. */
  max: number;
  /** True when some interval runs past the right edge. */
  cappedAbove: boolean;
  /** Log10 positioning when the finite spread is too wide for linear. */
  log: boolean;
}

/** Ratio between extents beyond which the line switches to log spacing. */
const LOG_SWITCH = 1e3;

/**
 * Display window for a set of intervals.
 *
 * Unbounded intervals get a soft cap at 10x the system scale so the
 * arrowhead has somewhere to sit; a finite spread wider than three
 * decades switches the line to log positioning.
 */
export function numberLineScale(
  intervals: IntervalReport[],
  systemScale: number,
): NumberLineScale {
  const cap = 10 * systemScale;
  let min = 0;
  let max = 0;
  let capped = false;
  for (const iv of intervals) {
    min = Math.min(min, iv.lo);
    if (iv.hi === null) {
      max = Math.max(max, Math.max(cap, iv.lo * 2));
      capped = true;
    } else {
      max = Math.max(max, iv.hi);
    }
  }
  if (max <= min) max = min + 1;
  const finiteLos = intervals.map((iv) => iv.lo).filter((v) => v > 0);
  const smallest = finiteLos.length ? Math.min(...finiteLos) : 0;
  const log = !capped && smallest > 0 && max / smallest > LOG_SWITCH;
  return { min, max, cappedAbove: capped, log };
}

/** Map a value to [0, 1] along the displayed line. */
export function positionOnLine(value: number, scale: NumberLineScale): number {
  const clamped = Math.min(Math.max(value, scale.min), scale.max);
  if (scale.log) {
    const lo = Math.log10(Math.max(scale.min, scale.max / 1e6));
    const hi = Math.log10(scale.max);
    const v = Math.log10(Math.max(clamped, scale.max / 1e6));
    return (v - lo) / (hi - lo);
  }
  return (clamped - scale.min) / (scale.max - scale.min);
}
