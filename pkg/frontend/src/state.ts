/**
 * Pure session-state logic for the four-section wizard. Everything in
 * here derives from service responses; the DOM layer only reads it.
 */

import type { SessionJson } from './api.js';

export const MAX_ATTEMPTS = 5;

export const SECTIONS = ['introduction', 'sandbox', 'summary', 'reflection'] as const;
export type Section = (typeof SECTIONS)[number];

export interface UiSessionState {
  session: SessionJson | null;
  /** section currently on screen */
  section: Section;
  /** true while a service call is in flight (single active request) */
  busy: boolean;
  /** last service error to show in the banner, if any */
  error: string | null;
}

export function initialState(): UiSessionState {
  return { session: null, section: 'introduction', busy: false, error: null };
}

export function iterationCount(state: UiSessionState): number {
  return state.session ? state.session.iterations.length : 0;
}

export function attemptsRemaining(state: UiSessionState): number {
  return MAX_ATTEMPTS - iterationCount(state);
}

export function isComplete(state: UiSessionState): boolean {
  return state.session !== null && state.session.status === 'complete';
}

/**
 * Whether the metrics panel exists at all. Condition-derived, using the
 * condition label the service returned; for sessions without metrics
 * the panel is never mounted, not merely hidden. Actual table rows only
 * ever come from a report's insights array.
 */
export function metricsPanelMounted(state: UiSessionState): boolean {
  return state.session !== null && state.session.condition === 'T3';
}

export function goalText(state: UiSessionState): string {
  return state.session ? state.session.goal_text : '';
}

/** The insights-useful survey question exists only where insights were
 * part of the protocol. */
export function surveyAsksUsefulness(state: UiSessionState): boolean {
  return state.session !== null && state.session.condition === 'T3';
}

/**
 * Which sections may be entered right now. Order is enforced: the
 * wizard starts at the introduction, and summary/reflection open up
 * only after the first completed iteration.
 */
export function reachableSections(state: UiSessionState): Section[] {
  if (state.session === null) return ['introduction'];
  if (iterationCount(state) === 0) return ['sandbox'];
  return ['sandbox', 'summary', 'reflection'];
}

export function canEnter(state: UiSessionState, section: Section): boolean {
  return reachableSections(state).includes(section);
}

/**
 * The iteration whose reflection is still owed, or null. A participant
 * reflects on each iteration before submitting the next prompt.
 */
export function pendingReflection(state: UiSessionState): number | null {
  const session = state.session;
  if (session === null || session.iterations.length === 0) return null;
  const reflected = new Set(session.reflections.map((r) => r.iteration));
  const last = session.iterations.length;
  return reflected.has(last) ? null : last;
}

export type PromptLock =
  | { locked: false }
  | { locked: true; reason: 'busy' | 'attempts_exhausted' | 'reflection_due' | 'complete' };

/** Why (or whether) the prompt box is currently locked. */
export function promptLock(state: UiSessionState): PromptLock {
  if (state.busy) return { locked: true, reason: 'busy' };
  if (isComplete(state)) return { locked: true, reason: 'complete' };
  if (attemptsRemaining(state) <= 0) return { locked: true, reason: 'attempts_exhausted' };
  if (pendingReflection(state) !== null) return { locked: true, reason: 'reflection_due' };
  return { locked: false };
}

export function attemptCounterText(state: UiSessionState): string {
  return `${iterationCount(state)} of ${MAX_ATTEMPTS}`;
}
