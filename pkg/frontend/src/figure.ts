// Deterministic SVG rendering of convergence curves: iteration on the
// x axis, log10 of the chosen column on the y axis, one polyline per
// trace, optional dashed theory-slope overlay.

export interface Series {
  label: string;
  nu: number[];
  value: number[];
}

export interface FigureOptions {
  yLabel: string;
  logScale: boolean;
  // contraction gain: the overlay line falls by (1/2) log10(1/(1+omega))
  // per iteration in log10 space
  overlayOmega?: number;
}

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 70, right: 20, top: 20, bottom: 50 };
const PALETTE = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e',
  '#8c564b', '#e377c2', '#7f7f7f'];

interface Extent { min: number; max: number; }

function extent(values: number[]): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  return { min, max };
}

function scale(domain: Extent, rangeMin: number, rangeMax: number) {
  const span = domain.max - domain.min;
  return (v: number) =>
    rangeMin + ((v - domain.min) / span) * (rangeMax - rangeMin);
}

function ticks(domain: Extent, count: number): number[] {
  const span = domain.max - domain.min;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const out: number[] = [];
  for (let t = Math.ceil(domain.min / chosen) * chosen;
       t <= domain.max + 1e-12 * span; t += chosen) {
    out.push(Number(t.toPrecision(12)));
  }
  return out;
}

function fmt(v: number): string {
  return Number(v.toPrecision(6)).toString();
}

export function renderFigure(series: Series[], opts: FigureOptions): string {
  if (series.length === 0) {
    throw new Error('nothing to plot: no series given');
  }

  const points = series.map((s) => {
    const xs: number[] = [];
    const ys: number[] = [];
    for (let i = 0; i < s.nu.length; i++) {
      const v = s.value[i];
      if (!Number.isFinite(v)) continue;
      if (opts.logScale) {
        if (v <= 0) continue;
        xs.push(s.nu[i]);
        ys.push(Math.log10(v));
      } else {
        xs.push(s.nu[i]);
        ys.push(v);
      }
    }
    if (xs.length === 0) {
      throw new Error(`series '${s.label}' has no plottable points`);
    }
    return { label: s.label, xs, ys };
  });

  const xDomain = extent(points.flatMap((p) => p.xs));
  const yDomain = extent(points.flatMap((p) => p.ys));
  const sx = scale(xDomain, MARGIN.left, WIDTH - MARGIN.right);
  const sy = scale(yDomain, HEIGHT - MARGIN.bottom, MARGIN.top);

  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
    `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
    `font-family="sans-serif" font-size="12">`);
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  // axes
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`);
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`);

  for (const t of ticks(xDomain, 8)) {
    const px = sx(t);
    parts.push(`<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y0 + 5}" stroke="black"/>`);
    parts.push(`<text x="${fmt(px)}" y="${y0 + 18}" text-anchor="middle">${fmt(t)}</text>`);
  }
  for (const t of ticks(yDomain, 8)) {
    const py = sy(t);
    parts.push(`<line x1="${x0 - 5}" y1="${fmt(py)}" x2="${x0}" y2="${fmt(py)}" stroke="black"/>`);
    parts.push(`<text x="${x0 - 8}" y="${fmt(py)}" text-anchor="end" dominant-baseline="middle">${fmt(t)}</text>`);
  }

  parts.push(`<text x="${(x0 + x1) / 2}" y="${HEIGHT - 10}" text-anchor="middle">iteration</text>`);
  const yLabel = opts.logScale ? `log10 ${opts.yLabel}` : opts.yLabel;
  parts.push(`<text x="16" y="${(y0 + y1) / 2}" text-anchor="middle" ` +
    `transform="rotate(-90 16 ${(y0 + y1) / 2})">${yLabel}</text>`);

  // curves
  points.forEach((p, k) => {
    const color = PALETTE[k % PALETTE.length];
    const coords = p.xs.map((x, i) => `${fmt(sx(x))},${fmt(sy(p.ys[i]))}`);
    parts.push(`<polyline fill="none" stroke="${color}" stroke-width="1.5" ` +
      `points="${coords.join(' ')}"/>`);
  });

  // dashed theory-slope overlay, anchored at the first point of the
  // first series
  if (opts.overlayOmega !== undefined) {
    if (!opts.logScale) {
      throw new Error('the theory overlay requires the log scale');
    }
    const slope = 0.5 * Math.log10(1 / (1 + opts.overlayOmega));
    const p0 = points[0];
    const xStart = p0.xs[0];
    const yStart = p0.ys[0];
    const xEnd = xDomain.max;
    const yEnd = yStart + slope * (xEnd - xStart);
    const yClamped = Math.max(yEnd, yDomain.min);
    const xClamped = slope === 0 ? xEnd
      : Math.min(xEnd, xStart + (yClamped - yStart) / slope);
    parts.push(`<line x1="${fmt(sx(xStart))}" y1="${fmt(sy(yStart))}" ` +
      `x2="${fmt(sx(xClamped))}" y2="${fmt(sy(yClamped))}" ` +
      `stroke="black" stroke-dasharray="6 4"/>`);
  }

  // legend
  const legendX = x1 - 180;
  let legendY = y1 + 10;
  points.forEach((p, k) => {
    const color = PALETTE[k % PALETTE.length];
    parts.push(`<line x1="${legendX}" y1="${legendY}" x2="${legendX + 24}" ` +
      `y2="${legendY}" stroke="${color}" stroke-width="1.5"/>`);
    parts.push(`<text x="${legendX + 30}" y="${legendY + 4}">${escapeXml(p.label)}</text>`);
    legendY += 18;
  });
  if (opts.overlayOmega !== undefined) {
    parts.push(`<line x1="${legendX}" y1="${legendY}" x2="${legendX + 24}" ` +
      `y2="${legendY}" stroke="black" stroke-dasharray="6 4"/>`);
    parts.push(`<text x="${legendX + 30}" y="${legendY + 4}">theory slope</text>`);
  }

  parts.push('</svg>');
  return parts.join('\n') + '\n';
}

function escapeXml(s: string): string {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}
