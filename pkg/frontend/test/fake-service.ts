import type { FetchLike } from '../src/api'
import type { LayoutJson, LayoutObject } from '../src/types'

// In-memory stand-in for the design service, mirroring its JSON schemas
// and status codes (404/409/422) closely enough for controller tests.

const SHELF: LayoutObject = {
  name: 'tall_bookshelf',
  category: 'bookshelf',
  bbox: { h: 1.9, w: 0.9, d: 0.35 },
  coordinates: { x: -1.7, y: 0.95, z: 1.6 },
  angle: 180,
}

export class FakeService {
  generated = false
  layout: LayoutJson = {
    room_type: 'Bedroom',
    bounds: { half_x: 2, half_z: 2, height: 3 },
    objects: [],
  }
  failNextEdit: string | null = null
  requests: string[] = []

  constructor(private instanceNames: string[]) {}

  private baseObjects(): LayoutObject[] {
    return this.instanceNames.map((name, i) => ({
      name,
      category: name.replace(/_/g, ' '),
      bbox: { h: 0.5, w: 0.5, d: 0.5 },
      coordinates: { x: -1.5 + i * 0.8, y: 0.25, z: -1.7 },
      angle: 0,
    }))
  }

  private json(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { 'Content-Type': 'application/json' },
    })
  }

  private metricsBody() {
    return {
      oor_mean: 0,
      oor_max: 0,
      overlapping_pairs: [],
      oob_rate: 0,
      alignment_rate: 1,
      object_count: this.layout.objects.length,
    }
  }

  fetch: FetchLike = async (input, init) => {
    const url = new URL(input, 'http://fake')
    const path = url.pathname
    this.requests.push(`${init?.method ?? 'GET'} ${path}`)

    if (path === '/sessions' && init?.method === 'POST') {
      return this.json(200, {
        id: 'fake-session',
        phase: 'created',
        room_type: 'Bedroom',
        instances: this.instanceNames,
        object_count: 0,
      })
    }
    if (!path.startsWith('/sessions/fake-session')) {
      return this.json(404, { detail: 'unknown or expired session' })
    }
    if (path.endsWith('/generate')) {
      this.generated = true
      this.layout = { ...this.layout, objects: this.baseObjects() }
      return this.json(200, this.layout)
    }
    if (path.endsWith('/edit')) {
      if (!this.generated) return this.json(409, { detail: 'edit requires a generated layout' })
      if (this.failNextEdit) {
        const raw = this.failNextEdit
        this.failNextEdit = null
        return this.json(422, { detail: { error: 'edit_failed', message: 'parse error', raw } })
      }
      const body = JSON.parse(String(init?.body))
      if (body.kind === 'add') {
        this.layout = { ...this.layout, objects: [...this.layout.objects, SHELF] }
      } else {
        const target = String(body.items[0]).replace(/\s+/g, '_').replace(/^(a|an|the)_/, '')
        const survivors = this.layout.objects.filter((o) => !o.name.includes(target))
        if (survivors.length === this.layout.objects.length) {
          return this.json(422, { detail: `no current object matches ${body.items[0]}` })
        }
        this.layout = { ...this.layout, objects: survivors }
      }
      return this.json(200, this.layout)
    }
    if (path.endsWith('/layout')) {
      if (!this.generated) return this.json(409, { detail: 'layout not generated yet' })
      return this.json(200, this.layout)
    }
    if (path.endsWith('/metrics')) {
      return this.json(200, this.metricsBody())
    }
    return this.json(404, { detail: 'unknown route' })
  }
}
