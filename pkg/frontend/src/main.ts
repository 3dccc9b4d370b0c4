import { DesignServiceClient } from './api'
import { canvasSize, drawLayout } from './canvas'
import { SessionController } from './session'
import type { UiSessionView } from './session'
import type { RequestItemIn } from './types'

const SERVICE_URL =
  new URLSearchParams(window.location.search).get('service') ?? 'http://127.0.0.1:8000'

const controller = new SessionController(new DesignServiceClient(SERVICE_URL))

const el = <T extends HTMLElement>(id: string) => document.getElementById(id) as T

const canvas = el<HTMLCanvasElement>('layout-canvas')
const transcriptList = el<HTMLUListElement>('transcript')
const metricsPanel = el<HTMLElement>('metrics')
const svgFallback = el<HTMLImageElement>('svg-fallback')
const buttons = ['start-btn', 'add-btn', 'remove-btn'].map((id) => el<HTMLButtonElement>(id))

function parseItems(text: string): RequestItemIn[] {
  // one item per line: "2 x dining chair" or just "dining chair"
  return text
    .split('\n')
    .map((line) => line.trim())
    .filter(Boolean)
    .map((line) => {
      const match = line.match(/^(\d+)\s*[x*]\s*(.+)$/i)
      return match
        ? { quantity: parseInt(match[1], 10), description: match[2].trim() }
        : { quantity: 1, description: line }
    })
}

function render(view: UiSessionView) {
  buttons.forEach((b) => (b.disabled = view.pending))
  transcriptList.replaceChildren(
    ...view.transcript.map((entry) => {
      const item = document.createElement('li')
      item.className = entry.status
      if (entry.status === 'error') {
        // raw backend text stays collapsed until expanded
        const details = document.createElement('details')
        const summary = document.createElement('summary')
        summary.textContent = `${entry.action} failed`
        const pre = document.createElement('pre')
        pre.textContent = entry.detail
        details.append(summary, pre)
        item.appendChild(details)
      } else {
        item.textContent = `${entry.action}: ${entry.detail}`
      }
      return item
    }),
  )
  if (view.metrics) {
    metricsPanel.textContent =
      `objects ${view.metrics.object_count} · overlap mean ${view.metrics.oor_mean.toFixed(3)}` +
      ` · out-of-bounds ${view.metrics.oob_rate.toFixed(2)} · aligned ${view.metrics.alignment_rate.toFixed(2)}`
  } else {
    metricsPanel.textContent = 'no metrics yet'
  }
  if (view.layout) {
    const { width, height } = canvasSize(view.layout)
    canvas.width = width
    canvas.height = height
    const ctx = canvas.getContext('2d')
    if (ctx) drawLayout(ctx, view.layout)
  }
  const url = controller.renderUrl()
  if (url && view.layout) {
    svgFallback.src = `${url}?t=${view.transcript.length}`
  }
}

controller.onChange = render

el<HTMLButtonElement>('start-btn').addEventListener('click', () => {
  const roomType = el<HTMLInputElement>('room-type').value.trim() || 'Bedroom'
  const items = parseItems(el<HTMLTextAreaElement>('items').value)
  if (items.length) void controller.startSession(roomType, items)
})

el<HTMLButtonElement>('add-btn').addEventListener('click', () => {
  const items = parseItems(el<HTMLTextAreaElement>('add-items').value)
  if (items.length) void controller.submitEdit('add', items)
})

el<HTMLButtonElement>('remove-btn').addEventListener('click', () => {
  const text = el<HTMLInputElement>('remove-text').value.trim()
  if (text) void controller.submitEdit('remove', [text])
})

render(controller.view)
