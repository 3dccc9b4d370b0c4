import { spawn, type ChildProcess } from 'node:child_process'

import { afterAll, beforeAll, describe, expect, it } from 'vitest'

import { DesignServiceClient } from '../src/api'
import { layoutFootprints } from '../src/canvas'
import { SessionController } from '../src/session'

// Full session flow against the real HTTP service running the heuristic
// backend. Requires the Python package to be installed (llplace on PATH).

const PORT = 8791
const BASE = `http://127.0.0.1:${PORT}`

let service: ChildProcess

async function waitForHealthz(timeoutMs = 15000): Promise<void> {
  const deadline = Date.now() + timeoutMs
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/healthz`)
      if (response.ok) return
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200))
  }
  throw new Error('service did not become healthy')
}

beforeAll(async () => {
  service = spawn('llplace', ['serve', '--port', String(PORT), '--seed', '2'], {
    stdio: 'ignore',
  })
  await waitForHealthz()
}, 20000)

afterAll(() => {
  service?.kill()
})

describe('UI session flow against the live service (heuristic backend)', () => {
  it('generate renders N, add renders N+1, remove deletes the named footprint, 422 keeps canvas', async () => {
    const controller = new SessionController(new DesignServiceClient(BASE))

    const started = await controller.startSession('Bedroom', [
      { quantity: 1, description: 'double bed' },
      { quantity: 1, description: 'wooden nightstand' },
      { quantity: 1, description: 'floor lamp' },
    ])
    expect(started.layout).not.toBeNull()
    const n = started.layout!.objects.length
    expect(n).toBe(3)
    expect(layoutFootprints(started.layout!)).toHaveLength(n)
    expect(started.metrics?.object_count).toBe(n)

    const added = await controller.submitEdit('add', [
      { quantity: 1, description: 'tall bookshelf' },
    ])
    expect(added.layout!.objects).toHaveLength(n + 1)
    expect(layoutFootprints(added.layout!)).toHaveLength(n + 1)

    const removed = await controller.submitEdit('remove', ['the floor lamp'])
    const names = removed.layout!.objects.map((o) => o.name)
    expect(names).toHaveLength(n)
    expect(names).not.toContain('floor_lamp')
    expect(names).toContain('tall_bookshelf')

    const before = controller.view.layout
    const failed = await controller.submitEdit('remove', ['grand piano'])
    expect(failed.layout).toEqual(before)
    const lastEntry = failed.transcript[failed.transcript.length - 1]
    expect(lastEntry.status).toBe('error')
    expect(lastEntry.detail).toContain('piano')
  }, 20000)
})
