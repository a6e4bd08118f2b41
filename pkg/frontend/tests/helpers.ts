/** Shared fixture builders for the UI tests. */

import type {
  InsightJson,
  IterationJson,
  ReportJson,
  SessionJson,
} from '../src/api.js';
import type { UiSessionState } from '../src/state.js';

export function makeInsight(rank: number, overrides: Partial<InsightJson> = {}): InsightJson {
  return {
    rank,
    description: `material ${rank}`,
    match: { record_id: rank, score: 0.5, method: 'lexical', duplicate: false },
    carbon: {
      raw: { value: 10.5 * rank, basis: 'per_functional_unit', unit_label: 'kg CO₂e / kg' },
      biogenic: rank % 2 === 0 ? -3.25 : 0.0,
      per_kg:
        rank % 3 === 0
          ? null
          : { value: 1.05 * rank, basis: 'per_kg', unit_label: 'kg CO₂e / kg' },
      normalization_note:
        rank % 3 === 0 ? 'n/a (unit not normalizable)' : 'approximate, linear scaling',
    },
    freshness_note: '',
  };
}

export function makeReport(insights?: InsightJson[]): ReportJson {
  const base: ReportJson = {
    condition_visibility: insights === undefined ? 'metrics_hidden' : 'metrics_shown',
    image: {
      image_id: 'a'.repeat(64),
      media_type: 'png',
      prompt_text: 'a quiet room',
      created_at: '2025-01-01T00:00:00Z',
      backend_label: 'mock',
    },
    pipeline_trace: [{ stage: 't2i', mode: 'mock', calls: 1 }],
    shortfall: false,
  };
  if (insights !== undefined) {
    base.insights = insights;
    base.failed = [];
  }
  return base;
}

export function makeIteration(index: number, insights?: InsightJson[]): IterationJson {
  return {
    index,
    prompt: `prompt ${index}`,
    report: makeReport(insights),
    submitted_at: '2025-01-01T00:01:00Z',
  };
}

export interface SessionOptions {
  iterations?: IterationJson[];
  reflections?: Array<{ iteration: number; text: string; recorded_at: string }>;
  status?: string;
  goalText?: string;
}

export function makeSession(condition: string, options: SessionOptions = {}): SessionJson {
  return {
    session_id: 'abc123def456',
    participant_label: 'p1',
    condition,
    status: options.status ?? 'open',
    created_at: '2025-01-01T00:00:00Z',
    finalized_at: null,
    goal_text: options.goalText ?? '',
    intake: {},
    iterations: options.iterations ?? [],
    reflections: options.reflections ?? [],
    failed_attempts: [],
    final_survey: null,
  };
}

export function makeState(session: SessionJson | null, overrides: Partial<UiSessionState> = {}): UiSessionState {
  return { session, section: 'sandbox', busy: false, error: null, ...overrides };
}

export function reflected(upTo: number): Array<{ iteration: number; text: string; recorded_at: string }> {
  return Array.from({ length: upTo }, (_, i) => ({
    iteration: i + 1,
    text: `thought ${i + 1}`,
    recorded_at: '2025-01-01T00:02:00Z',
  }));
}
