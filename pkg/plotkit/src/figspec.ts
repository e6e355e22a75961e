/** Figure specification consumed by the renderers. */

export type FigureKind = "bode" | "timeseries" | "rootlocus" | "compass";

export interface Annotations {
  /** vertical markers at the measurement-zero band edges (rad/s) */
  band?: [number, number];
  /** actuator saturation level, drawn as symmetric horizontal lines */
  saturation_mw?: number;
  /** constant damping-ratio rays for root loci */
  zeta_rays?: number[];
  /** shaded disturbance window [t_start, t_end] for time series */
  disturbance_window?: [number, number];
}

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  output: string;
  annotations?: Annotations;
  title?: string;
  /** per-kind column hints (defaults follow the CLI contracts) */
  x?: string;
  y?: string[];
}

export function validateSpec(spec: unknown): FigureSpec {
  if (typeof spec !== "object" || spec === null) {
    throw new Error("figure spec must be a JSON object");
  }
  const s = spec as Record<string, unknown>;
  const kinds = ["bode", "timeseries", "rootlocus", "compass"];
  if (typeof s.kind !== "string" || !kinds.includes(s.kind)) {
    throw new Error(`kind must be one of ${kinds.join("|")}`);
  }
  if (!Array.isArray(s.inputs) || s.inputs.length === 0
      || !s.inputs.every((v) => typeof v === "string")) {
    throw new Error("inputs must be a nonempty array of CSV paths");
  }
  if (typeof s.output !== "string") {
    throw new Error("output must be an image path");
  }
  return s as unknown as FigureSpec;
}
