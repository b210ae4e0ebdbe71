#!/usr/bin/env node
/**
 * figures --csv PATH [--csv PATH ...] --series u_0,u_1,delta_0,delta_1
 *         [--xscale linear|log] --out PATH.svg|PATH.png
 *         [--title T] [--xlabel X] [--ylabel Y] [--width W] [--height H]
 *
 * Exit codes: 0 success, 1 malformed input or render failure, 2 usage error.
 */

import { parseArgs } from "node:util";
import { InputError } from "./csv";
import { FigureSpec, renderFigure } from "./render";

export function parseSpec(argv: string[]): FigureSpec {
  let values;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        csv: { type: "string", multiple: true },
        series: { type: "string" },
        xscale: { type: "string", default: "linear" },
        out: { type: "string" },
        title: { type: "string" },
        xlabel: { type: "string" },
        ylabel: { type: "string" },
        width: { type: "string" },
        height: { type: "string" },
      },
    }));
  } catch (err) {
    throw new UsageError((err as Error).message);
  }
  if (!values.csv || values.csv.length === 0) throw new UsageError("--csv is required");
  if (!values.series) throw new UsageError("--series is required");
  if (!values.out) throw new UsageError("--out is required");
  if (values.xscale !== "linear" && values.xscale !== "log") {
    throw new UsageError(`--xscale must be linear or log, got ${values.xscale}`);
  }
  const series = values.series.split(",").map((s) => s.trim()).filter((s) => s.length > 0);
  if (series.length === 0) throw new UsageError("--series selected nothing");
  return {
    csvPaths: values.csv,
    series,
    xscale: values.xscale,
    out: values.out,
    title: values.title,
    xlabel: values.xlabel,
    ylabel: values.ylabel,
    width: values.width ? Number(values.width) : undefined,
    height: values.height ? Number(values.height) : undefined,
  };
}

export class UsageError extends Error {}

export function main(argv: string[]): number {
  try {
    const spec = parseSpec(argv);
    renderFigure(spec);
    return 0;
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`);
      return 2;
    }
    if (err instanceof InputError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
