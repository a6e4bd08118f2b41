/**
 * Typed client for the carbonsight HTTP service. Every piece of data
 * the UI displays comes through here; nothing is computed client-side.
 */

export interface QuantityJson {
  value: number;
  basis: string;
  unit_label: string;
}

export interface InsightJson {
  rank: number;
  description: string;
  match: {
    record_id: number;
    score: number;
    method: string;
    duplicate: boolean;
  };
  carbon: {
    raw: QuantityJson;
    biogenic: number;
    per_kg: QuantityJson | null;
    normalization_note: string;
  };
  freshness_note: string;
}

export interface ReportJson {
  condition_visibility: string;
  image: {
    image_id: string;
    media_type: string;
    prompt_text: string;
    created_at: string;
    backend_label: string;
  };
  pipeline_trace: Array<{ stage: string; mode: string; calls: number }>;
  shortfall: boolean;
  /** present only when the session's condition shows metrics */
  insights?: InsightJson[];
  failed?: Array<{ rank: number; description: string; code: string; message: string }>;
}

export interface IterationJson {
  index: number;
  prompt: string;
  report: ReportJson;
  submitted_at: string;
}

export interface IterationResponse extends IterationJson {
  iteration_count: number;
  attempts_remaining: number;
}

export interface SurveyJson {
  satisfaction: { label: string; score: number };
  sustainability_considered: { label: string; score: number };
  insights_useful: { label: string; score: number } | null;
  free_text: string;
}

export interface SessionJson {
  session_id: string;
  participant_label: string;
  condition: string;
  status: string;
  created_at: string;
  finalized_at: string | null;
  goal_text: string;
  intake: Record<string, unknown>;
  iterations: IterationJson[];
  reflections: Array<{ iteration: number; text: string; recorded_at: string }>;
  failed_attempts: Array<{ prompt: string; code: string; message: string; occurred_at: string }>;
  final_survey: SurveyJson | null;
}

export interface SessionSummaryJson {
  session_id: string;
  participant_label: string;
  condition: string;
  goal_text: string;
  status: string;
  pairs: Array<{
    index: number;
    prompt: string;
    image_id: string;
    media_type: string;
    report: ReportJson;
  }>;
  reflections: Array<{ iteration: number; text: string }>;
  final_survey: SurveyJson | null;
}

export interface IntakeForm {
  participantLabel: string;
  background: string;
  condition: string;
}

export interface SurveyForm {
  satisfaction: string;
  sustainabilityConsidered: string;
  insightsUseful: string | null;
  freeText: string;
}

/** Error envelope shared by every service endpoint. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly correlationId: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let code = 'internal_error';
  let message = `service responded ${resp.status}`;
  let correlationId = '';
  try {
    const body = (await resp.json()) as Record<string, unknown>;
    if (typeof body.code === 'string') code = body.code;
    if (typeof body.message === 'string') message = body.message;
    if (typeof body.correlation_id === 'string') correlationId = body.correlation_id;
  } catch {
    // non-JSON error body; keep the defaults
  }
  return new ApiError(resp.status, code, message, correlationId);
}

export class ServiceClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      throw await parseError(resp);
    }
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string; records: number; mode: string }> {
    return this.request('GET', '/healthz');
  }

  createSession(form: IntakeForm): Promise<SessionJson> {
    return this.request('POST', '/sessions', {
      participant_label: form.participantLabel,
      condition: form.condition,
      intake: { background: form.background, consent: true },
    });
  }

  getSession(sessionId: string): Promise<SessionJson> {
    return this.request('GET', `/sessions/${encodeURIComponent(sessionId)}`);
  }

  submitIteration(sessionId: string, prompt: string): Promise<IterationResponse> {
    return this.request('POST', `/sessions/${encodeURIComponent(sessionId)}/iterations`, {
      prompt,
    });
  }

  addReflection(
    sessionId: string,
    iteration: number,
    text: string,
  ): Promise<{ iteration: number; text: string; recorded_at: string }> {
    return this.request(
      'POST',
      `/sessions/${encodeURIComponent(sessionId)}/iterations/${iteration}/reflection`,
      { text },
    );
  }

  finalize(sessionId: string, survey: SurveyForm): Promise<SessionJson> {
    const body: Record<string, unknown> = {
      satisfaction: survey.satisfaction,
      sustainability_considered: survey.sustainabilityConsidered,
      free_text: survey.freeText,
    };
    if (survey.insightsUseful !== null) {
      body.insights_useful = survey.insightsUseful;
    }
    return this.request('POST', `/sessions/${encodeURIComponent(sessionId)}/finalize`, body);
  }

  sessionSummary(sessionId: string): Promise<SessionSummaryJson> {
    return this.request('GET', `/sessions/${encodeURIComponent(sessionId)}/summary`);
  }

  /** Images are content-addressed; the URL is stable and cacheable. */
  imageUrl(imageId: string): string {
    return `${this.baseUrl}/images/${imageId}`;
  }
}
