/** Axis scales and tick generation for linear and log axes. */

export type ScaleKind = "linear" | "log";

export interface Scale {
  kind: ScaleKind;
  min: number;
  max: number;
  /** map a data value onto [0, 1] */
  unit(v: number): number;
  ticks(): number[];
}

function niceStep(span: number): number {
  const raw = span / 6;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

export function linearScale(lo: number, hi: number, pad = 0.05): Scale {
  if (!(hi > lo)) {
    hi = lo + 1;
    lo = lo - 1;
  }
  const span = hi - lo;
  const min = lo - pad * span;
  const max = hi + pad * span;
  return {
    kind: "linear",
    min,
    max,
    unit: (v) => (v - min) / (max - min),
    ticks: () => {
      const step = niceStep(max - min);
      const out: number[] = [];
      for (let t = Math.ceil(min / step) * step; t <= max + 1e-12; t += step) {
        out.push(Math.abs(t) < 1e-12 ? 0 : t);
      }
      return out;
    },
  };
}

export function logScale(lo: number, hi: number): Scale {
  if (!(lo > 0) || !(hi > lo)) {
    throw new Error("log scale needs 0 < lo < hi");
  }
  const lmin = Math.log10(lo);
  const lmax = Math.log10(hi);
  return {
    kind: "log",
    min: lo,
    max: hi,
    unit: (v) => (Math.log10(v) - lmin) / (lmax - lmin),
    ticks: () => {
      const out: number[] = [];
      for (let d = Math.ceil(lmin); d <= Math.floor(lmax); d++) {
        out.push(Math.pow(10, d));
      }
      if (out.length === 0) out.push(lo, hi);
      return out;
    },
  };
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!(hi >= lo)) throw new Error("no finite values to scale");
  return [lo, hi];
}
