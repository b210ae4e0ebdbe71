/**
 * Figure construction: one labeled line per selected series, rendered
 * off-screen to SVG (echarts server-side renderer) and optionally rasterized
 * to PNG.
 */

import { writeFileSync } from "node:fs";
import { Resvg } from "@resvg/resvg-js";
import * as echarts from "echarts";
import { InputError, loadTrajectory, seriesColumn } from "./csv";

export interface FigureSpec {
  csvPaths: string[];
  series: string[];
  xscale: "linear" | "log";
  out: string;
  title?: string;
  xlabel?: string;
  ylabel?: string;
  width?: number;
  height?: number;
}

interface Line {
  label: string;
  points: [number, number][];
}

export function collectLines(spec: FigureSpec): Line[] {
  const lines: Line[] = [];
  for (const path of spec.csvPaths) {
    const table = loadTrajectory(path);
    if (table.rows < 2) {
      throw new InputError(`empty trajectory: ${path} needs at least 2 records`);
    }
    const t = seriesColumn(table, "t", path);
    for (const name of spec.series) {
      const col = seriesColumn(table, name, path);
      let points = t.map((tv, k) => [tv, col[k]] as [number, number]);
      points = points.filter(([tv, v]) => Number.isFinite(tv) && Number.isFinite(v));
      if (spec.xscale === "log") {
        // a log time axis cannot show t <= 0 (the initial record)
        points = points.filter(([tv]) => tv > 0);
      }
      if (points.length < 2) {
        throw new InputError(`series '${name}' in ${path} has fewer than 2 plottable points`);
      }
      const label = spec.csvPaths.length > 1 ? `${basename(path)}:${name}` : name;
      lines.push({ label, points });
    }
  }
  return lines;
}

function basename(path: string): string {
  const parts = path.split(/[\\/]/);
  return parts[parts.length - 1].replace(/\.csv$/i, "");
}

export function buildSvg(spec: FigureSpec): string {
  const lines = collectLines(spec);
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: spec.width ?? 900,
    height: spec.height ?? 560,
  });
  chart.setOption({
    animation: false,
    title: spec.title ? { text: spec.title, left: "center" } : undefined,
    legend: { bottom: 0, data: lines.map((l) => l.label) },
    grid: { left: 60, right: 20, top: spec.title ? 48 : 24, bottom: 56 },
    xAxis: {
      type: spec.xscale === "log" ? "log" : "value",
      name: spec.xlabel ?? "t",
      nameLocation: "middle",
      nameGap: 28,
    },
    yAxis: {
      type: "value",
      name: spec.ylabel ?? "",
      scale: true,
    },
    series: lines.map((l) => ({
      type: "line",
      name: l.label,
      showSymbol: false,
      data: l.points,
    })),
  });
  const svg = chart.renderToSVGString();
  chart.dispose();
  return svg;
}

export function renderFigure(spec: FigureSpec): void {
  const svg = buildSvg(spec);
  if (spec.out.toLowerCase().endsWith(".svg")) {
    writeFileSync(spec.out, svg);
  } else if (spec.out.toLowerCase().endsWith(".png")) {
    const png = new Resvg(svg, { fitTo: { mode: "original" } }).render().asPng();
    writeFileSync(spec.out, png);
  } else {
    throw new InputError(`unsupported output extension for ${spec.out} (use .svg or .png)`);
  }
}
