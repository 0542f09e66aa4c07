/**
 * Thin fetch client for the /v1 API. Every method returns the server's
 * JSON untouched; all branching and scoring stays on the server.
 */

import type {
  AnswerBody,
  CatalogDetail,
  CatalogSummary,
  NewSessionResponse,
  NextPayload,
  ScoreReportJson,
  SessionDiffJson,
  SessionJson,
  SessionMetadataJson,
  TimelineJson,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
  } catch (err) {
    throw new ApiError(0, 'Unreachable', `service unreachable: ${String(err)}`);
  }
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    throw new ApiError(
      response.status,
      typeof body.code === 'string' ? body.code : 'UnknownError',
      typeof body.message === 'string' ? body.message : response.statusText,
    );
  }
  return body as T;
}

export class ApiClient {
  constructor(private base = '') {}

  listCatalogs(): Promise<CatalogSummary[]> {
    return request(`${this.base}/v1/catalogs`);
  }

  catalogDetail(catalogId: string): Promise<CatalogDetail> {
    return request(`${this.base}/v1/catalogs/${encodeURIComponent(catalogId)}`);
  }

  createSession(
    catalogId: string,
    selectedBlocks: string[],
    metadata: Partial<SessionMetadataJson>,
  ): Promise<NewSessionResponse> {
    return request(`${this.base}/v1/sessions`, {
      method: 'POST',
      body: JSON.stringify({
        catalog_id: catalogId,
        selected_blocks: selectedBlocks,
        metadata,
      }),
    });
  }

  getSession(sessionId: string): Promise<SessionJson> {
    return request(`${this.base}/v1/sessions/${encodeURIComponent(sessionId)}`);
  }

  next(sessionId: string): Promise<NextPayload> {
    return request(`${this.base}/v1/sessions/${encodeURIComponent(sessionId)}/next`);
  }

  submitAnswer(sessionId: string, body: AnswerBody): Promise<NewSessionResponse> {
    return request(`${this.base}/v1/sessions/${encodeURIComponent(sessionId)}/answers`, {
      method: 'POST',
      body: JSON.stringify(body),
    });
  }

  reviseAnswer(
    sessionId: string,
    blockId: string,
    indicator: string,
    verdict: 'yes' | 'no',
    unsure: boolean,
    comment: string | null,
  ): Promise<NewSessionResponse> {
    return request(
      `${this.base}/v1/sessions/${encodeURIComponent(sessionId)}/answers/${encodeURIComponent(indicator)}`,
      {
        method: 'PATCH',
        body: JSON.stringify({ block_id: blockId, verdict, unsure, comment }),
      },
    );
  }

  score(sessionId: string): Promise<ScoreReportJson> {
    return request(`${this.base}/v1/sessions/${encodeURIComponent(sessionId)}/score`);
  }

  timeline(useCaseId: string): Promise<TimelineJson> {
    return request(`${this.base}/v1/usecases/${encodeURIComponent(useCaseId)}/timeline`);
  }

  compare(fromId: string, toId: string): Promise<SessionDiffJson> {
    return request(
      `${this.base}/v1/compare?from=${encodeURIComponent(fromId)}&to=${encodeURIComponent(toId)}`,
    );
  }
}
