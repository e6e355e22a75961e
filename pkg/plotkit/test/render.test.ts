import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { describe, expect, it } from "vitest";

import { readCsv, column } from "../src/csv";
import { render } from "../src/render";
import { renderManifest, specFromHint } from "../src/manifest";
import { validateSpec } from "../src/figspec";

const FIX = path.join(__dirname, "fixtures");

function tmpdir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "plotkit-"));
}

describe("csv reader", () => {
  it("reads the bode column contract", () => {
    const t = readCsv(path.join(FIX, "fig6", "fig6_P1.csv"));
    expect(t.columns).toEqual(["omega", "mag", "phase_deg"]);
    expect(t.rows.length).toBeGreaterThan(100);
    expect(column(t, "omega")[0]).toBeGreaterThan(0);
  });

  it("names file and line on malformed input", () => {
    const dir = tmpdir();
    const bad = path.join(dir, "bad.csv");
    fs.writeFileSync(bad, "a,b\n1,2\n3\n");
    expect(() => readCsv(bad)).toThrow(/bad\.csv:3/);
  });
});

describe("figure specs", () => {
  it("rejects junk", () => {
    expect(() => validateSpec({ kind: "pie", inputs: ["x"], output: "y" }))
      .toThrow(/kind/);
    expect(() => validateSpec({ kind: "bode", inputs: [], output: "y" }))
      .toThrow(/inputs/);
  });
});

describe("fig4 bode rendering", () => {
  it("draws band markers and embeds them in the metadata", () => {
    const spec = validateSpec({
      kind: "bode",
      inputs: [path.join(FIX, "fig4", "fig4_ratio_d1.csv"),
               path.join(FIX, "fig4", "fig4_ratio_d2.csv")],
      output: path.join(tmpdir(), "fig4.svg"),
      annotations: { band: [0.745356, 2.236068] },
    });
    const result = render(spec);
    expect(result.meta.kind).toBe("bode");
    expect(result.meta.annotations.band?.[0]).toBeCloseTo(0.745356, 5);
    expect(result.meta.annotations.band?.[1]).toBeCloseTo(2.236068, 5);
    expect(result.svg).toContain("<svg");
    expect(result.svg).toContain("plotkit-meta");
    // two magnitude polylines + two phase polylines at least
    expect(result.svg.match(/<polyline/g)!.length).toBeGreaterThanOrEqual(4);
  });
});

describe("fig6 manifest rendering", () => {
  it("renders every plottable file with stable dimensions and axes", () => {
    const out = tmpdir();
    const written = renderManifest(path.join(FIX, "fig6", "manifest.json"), out);
    expect(written.length).toBe(4);
    for (const file of written) {
      const meta = JSON.parse(
        fs.readFileSync(file.replace(/\.svg$/, ".meta.json"), "utf8"));
      expect(meta.width).toBe(560);
      expect(meta.annotations.band[0]).toBeCloseTo(0.7453559925, 6);
      expect(meta.annotations.band[1]).toBeCloseTo(2.2360679775, 6);
      expect(meta.axes.omega.scale).toBe("log");
    }
    // rerun is identical at the metadata level (dimensions + axis ranges)
    const out2 = tmpdir();
    const written2 = renderManifest(path.join(FIX, "fig6", "manifest.json"), out2);
    const a = fs.readFileSync(written[0], "utf8");
    const b = fs.readFileSync(written2[0], "utf8");
    expect(a).toBe(b);
  });
});

describe("fig14 timeseries rendering", () => {
  it("shades the disturbance window and draws saturation lines", () => {
    const manifest = JSON.parse(
      fs.readFileSync(path.join(FIX, "fig14", "manifest.json"), "utf8"));
    const entry = manifest.files.find((f: { name: string }) =>
      f.name.endsWith("near.csv"));
    expect(entry.plot.kind).toBe("timeseries");
    const spec = specFromHint(path.join(FIX, "fig14", entry.name), entry.plot,
                              tmpdir(), manifest.annotations);
    const result = render(spec);
    expect(result.meta.kind).toBe("timeseries");
    expect(result.meta.annotations.saturation_mw).toBe(75.0);
    expect(result.meta.annotations.disturbance_window).toEqual([1.0, 2.0]);
    // u panel axis range must cover the saturation band
    expect(result.meta.axes.u_mw.min).toBeLessThan(-75);
    expect(result.meta.axes.u_mw.max).toBeGreaterThan(75);
    expect(result.svg).toContain("opacity=\"0.15\"");  // shaded window
  });
});

describe("rootlocus and compass smoke", () => {
  it("renders a synthetic root locus with zeta rays", () => {
    const dir = tmpdir();
    const csv = path.join(dir, "locus.csv");
    const rows = ["gain,pole_idx,re,im,zeta"];
    for (let g = 0; g <= 10; g++) {
      rows.push(`${g},0,${-0.1 - 0.05 * g},${5 - 0.05 * g},0.05`);
      rows.push(`${g},1,${-0.1 - 0.05 * g},${-5 + 0.05 * g},0.05`);
    }
    fs.writeFileSync(csv, rows.join("\n") + "\n");
    const result = render({ kind: "rootlocus", inputs: [csv],
                            output: path.join(dir, "locus.svg"),
                            annotations: { zeta_rays: [0.1] } });
    expect(result.meta.axes.im.max).toBeGreaterThan(4);
    expect(result.svg).toContain("zeta rays");
  });

  it("renders a compass with one arrow per machine", () => {
    const dir = tmpdir();
    const csv = path.join(dir, "shape.csv");
    fs.writeFileSync(csv, [
      "machine,re,im,mag,phase_deg",
      "G1,1.0,0.02,1.0,1.1",
      "G2,0.7,0.01,0.7,0.8",
      "G3,-0.9,-0.02,0.9,-178.7",
      "G4,-0.8,-0.01,0.8,-179.3",
    ].join("\n") + "\n");
    const result = render({ kind: "compass", inputs: [csv],
                            output: path.join(dir, "shape.svg") });
    expect(result.svg.match(/marker-end/g)!.length).toBe(4);
    expect(result.meta.axes.re.min).toBeLessThan(0);
  });
});
