import { ApiError, DesignServiceClient } from './api'
import type {
  EditKind,
  LayoutJson,
  MetricsJson,
  RequestItemIn,
} from './types'

export interface TranscriptEntry {
  action: string
  detail: string
  status: 'ok' | 'error'
}

// Mirror of the UI state: the canvas always shows `layout`, which only
// moves forward on successful turns; failed turns land in the transcript.
export interface UiSessionView {
  sessionId: string | null
  requestSummary: string
  transcript: TranscriptEntry[]
  layout: LayoutJson | null
  metrics: MetricsJson | null
  pending: boolean
}

function emptyView(): UiSessionView {
  return {
    sessionId: null,
    requestSummary: '',
    transcript: [],
    layout: null,
    metrics: null,
    pending: false,
  }
}

export class SessionController {
  view: UiSessionView = emptyView()
  onChange: (view: UiSessionView) => void = () => {}

  constructor(private api: DesignServiceClient) {}

  private emit() {
    this.onChange(this.view)
  }

  private record(action: string, detail: string, status: 'ok' | 'error') {
    this.view.transcript.push({ action, detail, status })
  }

  private failureDetail(error: unknown): string {
    // 4xx/5xx bodies are surfaced verbatim so raw model text is inspectable
    if (error instanceof ApiError) return error.body
    return String(error)
  }

  async startSession(roomType: string, items: RequestItemIn[]): Promise<UiSessionView> {
    if (this.view.pending) return this.view
    this.view = emptyView()
    this.view.requestSummary = `${roomType}: ${items
      .map((i) => `${i.quantity}x ${i.description}`)
      .join(', ')}`
    this.view.pending = true
    this.emit()
    try {
      const summary = await this.api.createSession(roomType, items)
      this.view.sessionId = summary.id
      this.record('create', `session ${summary.id} (${summary.instances.length} objects)`, 'ok')
      const layout = await this.api.generate(summary.id)
      this.view.layout = layout
      this.record('generate', `${layout.objects.length} objects placed`, 'ok')
      await this.refreshMetrics()
    } catch (error) {
      this.record('generate', this.failureDetail(error), 'error')
    } finally {
      this.view.pending = false
      this.emit()
    }
    return this.view
  }

  async submitEdit(kind: EditKind, items: (RequestItemIn | string)[]): Promise<UiSessionView> {
    if (this.view.pending || !this.view.sessionId || !this.view.layout) {
      return this.view
    }
    this.view.pending = true
    this.emit()
    try {
      const layout = await this.api.edit(this.view.sessionId, kind, items)
      this.view.layout = layout
      this.record(kind, `${layout.objects.length} objects in layout`, 'ok')
      await this.refreshMetrics()
    } catch (error) {
      // canvas keeps the last successful layout on 422/5xx
      this.record(kind, this.failureDetail(error), 'error')
    } finally {
      this.view.pending = false
      this.emit()
    }
    return this.view
  }

  private async refreshMetrics() {
    if (!this.view.sessionId) return
    this.view.metrics = await this.api.metrics(this.view.sessionId)
  }

  renderUrl(): string | null {
    return this.view.sessionId ? this.api.renderUrl(this.view.sessionId) : null
  }
}
