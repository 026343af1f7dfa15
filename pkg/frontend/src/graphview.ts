/** Static force-directed rendering of a case subgraph on SVG: ground-truth
 * edges solid, predicted edges dashed. */

import type { Subgraph } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 640;
const HEIGHT = 420;

interface Point {
  x: number;
  y: number;
}

function initialLayout(ids: string[]): Map<string, Point> {
  const points = new Map<string, Point>();
  const radius = Math.min(WIDTH, HEIGHT) / 2 - 50;
  ids.forEach((id, i) => {
    const angle = (2 * Math.PI * i) / Math.max(ids.length, 1);
    points.set(id, {
      x: WIDTH / 2 + radius * Math.cos(angle),
      y: HEIGHT / 2 + radius * Math.sin(angle),
    });
  });
  return points;
}

function relax(points: Map<string, Point>, edges: Array<[string, string]>, rounds = 120): void {
  const ids = [...points.keys()];
  const spring = 90;
  for (let round = 0; round < rounds; round++) {
    const force = new Map<string, Point>(ids.map((id) => [id, { x: 0, y: 0 }]));
    for (let i = 0; i < ids.length; i++) {
      for (let j = i + 1; j < ids.length; j++) {
        const a = points.get(ids[i])!;
        const b = points.get(ids[j])!;
        const dx = a.x - b.x;
        const dy = a.y - b.y;
        const dist2 = Math.max(dx * dx + dy * dy, 1);
        const push = 2200 / dist2;
        const fa = force.get(ids[i])!;
        const fb = force.get(ids[j])!;
        const norm = Math.sqrt(dist2);
        fa.x += (push * dx) / norm;
        fa.y += (push * dy) / norm;
        fb.x -= (push * dx) / norm;
        fb.y -= (push * dy) / norm;
      }
    }
    for (const [src, dst] of edges) {
      const a = points.get(src);
      const b = points.get(dst);
      if (!a || !b) continue;
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const dist = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
      const pull = 0.01 * (dist - spring);
      const fa = force.get(src)!;
      const fb = force.get(dst)!;
      fa.x += (pull * dx) / dist;
      fa.y += (pull * dy) / dist;
      fb.x -= (pull * dx) / dist;
      fb.y -= (pull * dy) / dist;
    }
    for (const id of ids) {
      const p = points.get(id)!;
      const f = force.get(id)!;
      p.x = Math.min(WIDTH - 30, Math.max(30, p.x + f.x));
      p.y = Math.min(HEIGHT - 20, Math.max(20, p.y + f.y));
    }
  }
}

export function renderSubgraph(
  container: HTMLElement,
  subgraph: Subgraph | null,
  onSelect: (id: string) => void,
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  if (subgraph === null || subgraph.nodes.length === 0) {
    const empty = doc.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "Select a case to draw its neighborhood.";
    container.append(empty);
    return;
  }

  const points = initialLayout(subgraph.nodes.map((n) => n.id));
  relax(
    points,
    subgraph.edges.map((e) => [e.src, e.dst]),
  );

  const svg = doc.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("class", "subgraph-svg");

  for (const edge of subgraph.edges) {
    const a = points.get(edge.src);
    const b = points.get(edge.dst);
    if (!a || !b) continue;
    const line = doc.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", a.x.toFixed(1));
    line.setAttribute("y1", a.y.toFixed(1));
    line.setAttribute("x2", b.x.toFixed(1));
    line.setAttribute("y2", b.y.toFixed(1));
    line.setAttribute("class", edge.observed ? "edge-observed" : "edge-predicted");
    if (!edge.observed) line.setAttribute("stroke-dasharray", "6 4");
    const title = doc.createElementNS(SVG_NS, "title");
    title.textContent = `${edge.src} – ${edge.dst}: ${edge.score.toFixed(3)}`;
    line.append(title);
    svg.append(line);
  }

  for (const node of subgraph.nodes) {
    const p = points.get(node.id)!;
    const group = doc.createElementNS(SVG_NS, "g");
    group.setAttribute("class", "subgraph-node" + (node.id === subgraph.center ? " center" : ""));
    const circle = doc.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", p.x.toFixed(1));
    circle.setAttribute("cy", p.y.toFixed(1));
    circle.setAttribute("r", node.id === subgraph.center ? "11" : "8");
    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("x", (p.x + 12).toFixed(1));
    label.setAttribute("y", (p.y + 4).toFixed(1));
    label.textContent = node.id;
    group.append(circle, label);
    group.addEventListener("click", () => onSelect(node.id));
    svg.append(group);
  }

  container.append(svg);
}
