/** Wire types, mirroring the server's JSON payloads. */

export interface IntervalReport {
  lo: number;
  loClosed: boolean;
  /** null encodes an unbounded upper end. */
  hi: number | null;
  hiClosed: boolean;
}

export interface RangeReport {
  parameter: string;
  intervals: IntervalReport[];
  seed: number;
  provenance: Record<string, unknown>;
}

export interface EntityReport {
  id: string;
  type: string;
}

export interface ConstraintReport {
  type: string;
  between: string[];
  parameter?: string;
}

export interface ParameterReport {
  name: string;
  kind: string;
  value: number | string | null;
}

export interface SystemPayload {
  entities: EntityReport[];
  constraints: ConstraintReport[];
  parameters: ParameterReport[];
  selected: string[];
  assigned: Record<string, number>;
  solution: Record<string, number> | null;
}

export interface RangesPayload {
  ranges: Record<string, RangeReport>;
  assigned: Record<string, number>;
  unassigned: string[];
}

export type RangesStatus =
  | { status: "no-session" | "computing" | "ready" | "stale" }
  | { status: "error"; detail: string };

export interface SolutionPayload {
  solution: Record<string, number> | null;
  residual: number | null;
}
