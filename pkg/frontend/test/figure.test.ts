import { describe, expect, it } from 'vitest';

import { renderFigure, Series } from '../src/figure';

function decaying(label: string, rate: number, n = 50): Series {
  const nu: number[] = [];
  const value: number[] = [];
  for (let i = 0; i < n; i++) {
    nu.push(i);
    value.push(10 * Math.exp(-rate * i));
  }
  return { label, nu, value };
}

describe('renderFigure', () => {
  it('renders one polyline per series plus a legend', () => {
    const svg = renderFigure([decaying('fast', 0.3), decaying('slow', 0.05)],
      { yLabel: 'dist_ref', logScale: true });
    expect(svg.startsWith('<svg')).toBe(true);
    expect(svg.match(/<polyline/g)).toHaveLength(2);
    expect(svg).toContain('>fast<');
    expect(svg).toContain('>slow<');
    expect(svg).toContain('log10 dist_ref');
  });

  it('is deterministic', () => {
    const series = [decaying('a', 0.2)];
    const opts = { yLabel: 'dist_ref', logScale: true };
    expect(renderFigure(series, opts)).toBe(renderFigure(series, opts));
  });

  it('drops non-positive values on the log scale', () => {
    const series: Series = {
      label: 'a', nu: [0, 1, 2, 3], value: [1.0, 0.0, -2.0, 0.5],
    };
    const svg = renderFigure([series], { yLabel: 'U', logScale: true });
    const points = svg.match(/points="([^"]*)"/)![1].trim().split(' ');
    expect(points).toHaveLength(2);
  });

  it('keeps negative values on the linear scale', () => {
    const series: Series = { label: 'a', nu: [0, 1], value: [-1.0, -2.0] };
    const svg = renderFigure([series], { yLabel: 'U', logScale: false });
    expect(svg).toContain('<polyline');
    expect(svg).not.toContain('log10');
  });

  it('draws a dashed overlay when omega is given', () => {
    const svg = renderFigure([decaying('a', 0.2)],
      { yLabel: 'dist_ref', logScale: true, overlayOmega: 0.1 });
    expect(svg).toContain('stroke-dasharray');
    expect(svg).toContain('theory slope');
  });

  it('rejects an overlay on a linear axis', () => {
    expect(() => renderFigure([decaying('a', 0.2)],
      { yLabel: 'U', logScale: false, overlayOmega: 0.1 }))
      .toThrow(/log scale/);
  });

  it('rejects empty input', () => {
    expect(() => renderFigure([], { yLabel: 'U', logScale: true }))
      .toThrow(/no series/);
    const allZero: Series = { label: 'z', nu: [0, 1], value: [0, 0] };
    expect(() => renderFigure([allZero], { yLabel: 'U', logScale: true }))
      .toThrow(/no plottable points/);
  });

  it('escapes markup in labels', () => {
    const svg = renderFigure(
      [{ ...decaying('x', 0.2), label: 'a<b&c' }],
      { yLabel: 'U', logScale: true });
    expect(svg).toContain('a&lt;b&amp;c');
    expect(svg).not.toContain('a<b');
  });
});
