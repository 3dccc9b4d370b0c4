import type { LayoutJson, LayoutObject } from './types'

// Drawing-only transform of the service layout JSON into screen-space
// footprints; all authoritative geometry (metrics, validation, the SVG
// fallback) comes from the service.

export interface Footprint {
  name: string
  category: string
  corners: [number, number][]
  heading: [[number, number], [number, number]]
}

export interface CanvasTransform {
  pixelsPerMeter: number
  padding: number
}

export const DEFAULT_TRANSFORM: CanvasTransform = { pixelsPerMeter: 100, padding: 20 }

const PALETTE: Record<string, string> = {
  bed: '#8ecae6',
  sofa: '#95d5b2',
  chair: '#ffb703',
  table: '#e9c46a',
  desk: '#e9c46a',
  lamp: '#f4a261',
  wardrobe: '#b5838d',
  nightstand: '#cdb4db',
}

export function colorFor(category: string): string {
  const key = category.toLowerCase()
  for (const [needle, color] of Object.entries(PALETTE)) {
    if (key.includes(needle)) return color
  }
  // stable non-cryptographic hash onto a pastel hue
  let hash = 0
  for (const ch of category) hash = (hash * 31 + ch.charCodeAt(0)) >>> 0
  return `hsl(${hash % 360}, 55%, 70%)`
}

function objectFootprint(
  obj: LayoutObject,
  layout: LayoutJson,
  t: CanvasTransform,
): Footprint {
  const theta = (obj.angle * Math.PI) / 180
  const c = Math.cos(theta)
  const s = Math.sin(theta)
  const hw = obj.bbox.w / 2
  const hd = obj.bbox.d / 2
  const toScreen = (x: number, z: number): [number, number] => [
    (x + layout.bounds.half_x) * t.pixelsPerMeter + t.padding,
    (z + layout.bounds.half_z) * t.pixelsPerMeter + t.padding,
  ]
  const base: [number, number][] = [
    [hw, hd],
    [-hw, hd],
    [-hw, -hd],
    [hw, -hd],
  ]
  const corners = base.map(([x, z]) =>
    toScreen(
      obj.coordinates.x + x * c - z * s,
      obj.coordinates.z + x * s + z * c,
    ),
  )
  const heading: [[number, number], [number, number]] = [
    toScreen(obj.coordinates.x, obj.coordinates.z),
    toScreen(obj.coordinates.x - s * hd, obj.coordinates.z + c * hd),
  ]
  return { name: obj.name, category: obj.category, corners, heading }
}

export function layoutFootprints(
  layout: LayoutJson,
  t: CanvasTransform = DEFAULT_TRANSFORM,
): Footprint[] {
  return layout.objects.map((obj) => objectFootprint(obj, layout, t))
}

export function canvasSize(layout: LayoutJson, t: CanvasTransform = DEFAULT_TRANSFORM) {
  return {
    width: 2 * layout.bounds.half_x * t.pixelsPerMeter + 2 * t.padding,
    height: 2 * layout.bounds.half_z * t.pixelsPerMeter + 2 * t.padding,
  }
}

export function drawLayout(
  ctx: CanvasRenderingContext2D,
  layout: LayoutJson,
  t: CanvasTransform = DEFAULT_TRANSFORM,
): void {
  const { width, height } = canvasSize(layout, t)
  ctx.clearRect(0, 0, width, height)
  ctx.fillStyle = '#ffffff'
  ctx.fillRect(0, 0, width, height)
  ctx.strokeStyle = '#333333'
  ctx.lineWidth = 2
  ctx.strokeRect(
    t.padding,
    t.padding,
    2 * layout.bounds.half_x * t.pixelsPerMeter,
    2 * layout.bounds.half_z * t.pixelsPerMeter,
  )
  for (const footprint of layoutFootprints(layout, t)) {
    ctx.beginPath()
    footprint.corners.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)))
    ctx.closePath()
    ctx.globalAlpha = 0.75
    ctx.fillStyle = colorFor(footprint.category || footprint.name)
    ctx.fill()
    ctx.globalAlpha = 1
    ctx.strokeStyle = '#222222'
    ctx.lineWidth = 1
    ctx.stroke()
    ctx.beginPath()
    ctx.moveTo(...footprint.heading[0])
    ctx.lineTo(...footprint.heading[1])
    ctx.lineWidth = 1.5
    ctx.stroke()
    ctx.fillStyle = '#111111'
    ctx.font = '11px sans-serif'
    ctx.textAlign = 'center'
    ctx.fillText(footprint.name, footprint.heading[0][0], footprint.heading[0][1])
  }
}
