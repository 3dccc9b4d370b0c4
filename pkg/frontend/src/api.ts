import type {
  EditKind,
  LayoutJson,
  MetricsJson,
  RequestItemIn,
  SessionSummary,
} from './types'

export class ApiError extends Error {
  constructor(public status: number, public body: string) {
    super(`HTTP ${status}: ${body}`)
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

// Thin typed client over the design service; fetch is injectable for tests.
export class DesignServiceClient {
  constructor(
    private baseUrl: string = '',
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    })
    const text = await response.text()
    if (!response.ok) {
      throw new ApiError(response.status, text)
    }
    return JSON.parse(text) as T
  }

  createSession(roomType: string, items: RequestItemIn[]): Promise<SessionSummary> {
    return this.request('/sessions', {
      method: 'POST',
      body: JSON.stringify({ room_type: roomType, items }),
    })
  }

  generate(sessionId: string): Promise<LayoutJson> {
    return this.request(`/sessions/${sessionId}/generate`, { method: 'POST' })
  }

  edit(sessionId: string, kind: EditKind, items: (RequestItemIn | string)[]): Promise<LayoutJson> {
    return this.request(`/sessions/${sessionId}/edit`, {
      method: 'POST',
      body: JSON.stringify({ kind, items }),
    })
  }

  layout(sessionId: string): Promise<LayoutJson> {
    return this.request(`/sessions/${sessionId}/layout`)
  }

  metrics(sessionId: string): Promise<MetricsJson> {
    return this.request(`/sessions/${sessionId}/metrics`)
  }

  renderUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/render.svg`
  }
}
