// JSON shapes mirrored from the design service; the UI never recomputes
// any of these values, it only displays them.

export interface BBox {
  h: number
  w: number
  d: number
}

export interface Coordinates {
  x: number
  y: number
  z: number
}

export interface LayoutObject {
  name: string
  category: string
  bbox: BBox
  coordinates: Coordinates
  angle: number
}

export interface RoomBounds {
  half_x: number
  half_z: number
  height: number
}

export interface LayoutJson {
  room_type: string
  bounds: RoomBounds
  objects: LayoutObject[]
}

export interface MetricsJson {
  oor_mean: number
  oor_max: number
  overlapping_pairs: [string, string, number][]
  oob_rate: number
  alignment_rate: number
  object_count: number
}

export interface SessionSummary {
  id: string
  phase: string
  room_type: string
  instances: string[]
  object_count: number
}

export interface RequestItemIn {
  quantity: number
  description: string
}

export type EditKind = 'add' | 'remove'
