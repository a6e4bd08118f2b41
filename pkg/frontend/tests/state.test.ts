import { describe, expect, it } from 'vitest';

import {
  attemptCounterText,
  attemptsRemaining,
  canEnter,
  initialState,
  iterationCount,
  metricsPanelMounted,
  pendingReflection,
  promptLock,
  reachableSections,
  surveyAsksUsefulness,
} from '../src/state.js';
import { makeIteration, makeSession, makeState, reflected } from './helpers.js';

describe('section gating', () => {
  it('starts at the introduction with nothing else reachable', () => {
    const state = initialState();
    expect(reachableSections(state)).toEqual(['introduction']);
    expect(canEnter(state, 'summary')).toBe(false);
    expect(canEnter(state, 'reflection')).toBe(false);
  });

  it('opens only the sandbox after session creation', () => {
    const state = makeState(makeSession('T1'));
    expect(reachableSections(state)).toEqual(['sandbox']);
  });

  it('keeps summary and reflection unreachable before the first iteration', () => {
    const state = makeState(makeSession('T3'));
    expect(canEnter(state, 'summary')).toBe(false);
    expect(canEnter(state, 'reflection')).toBe(false);
  });

  it('unlocks summary and reflection after one iteration', () => {
    const state = makeState(makeSession('T3', { iterations: [makeIteration(1)] }));
    expect(canEnter(state, 'summary')).toBe(true);
    expect(canEnter(state, 'reflection')).toBe(true);
    expect(canEnter(state, 'introduction')).toBe(false);
  });
});

describe('attempt accounting', () => {
  it('counts iterations from the session, not local clicks', () => {
    const iterations = [1, 2, 3].map((i) => makeIteration(i));
    const state = makeState(makeSession('T1', { iterations }));
    expect(iterationCount(state)).toBe(3);
    expect(attemptsRemaining(state)).toBe(2);
    expect(attemptCounterText(state)).toBe('3 of 5');
  });

  it('reports zero attempts before any session exists', () => {
    expect(iterationCount(initialState())).toBe(0);
  });
});

describe('prompt locking', () => {
  it('is unlocked for a fresh session', () => {
    const state = makeState(makeSession('T1'));
    expect(promptLock(state)).toEqual({ locked: false });
  });

  it('locks while a request is in flight', () => {
    const state = makeState(makeSession('T1'), { busy: true });
    expect(promptLock(state)).toEqual({ locked: true, reason: 'busy' });
  });

  it('locks until the latest iteration has a reflection', () => {
    const session = makeSession('T1', { iterations: [makeIteration(1)] });
    const state = makeState(session);
    expect(promptLock(state)).toEqual({ locked: true, reason: 'reflection_due' });
    expect(pendingReflection(state)).toBe(1);

    session.reflections = reflected(1);
    expect(promptLock(state)).toEqual({ locked: false });
    expect(pendingReflection(state)).toBe(null);
  });

  it('locks for good once five iterations exist', () => {
    const iterations = [1, 2, 3, 4, 5].map((i) => makeIteration(i));
    const state = makeState(
      makeSession('T1', { iterations, reflections: reflected(5) }),
    );
    expect(promptLock(state)).toEqual({ locked: true, reason: 'attempts_exhausted' });
  });

  it('locks when the session is complete', () => {
    const state = makeState(
      makeSession('T1', { iterations: [makeIteration(1)], status: 'complete' }),
    );
    expect(promptLock(state)).toEqual({ locked: true, reason: 'complete' });
  });
});

describe('condition-derived visibility', () => {
  it('mounts the metrics panel only for T3', () => {
    expect(metricsPanelMounted(makeState(makeSession('T1')))).toBe(false);
    expect(metricsPanelMounted(makeState(makeSession('T2')))).toBe(false);
    expect(metricsPanelMounted(makeState(makeSession('T3')))).toBe(true);
    expect(metricsPanelMounted(initialState())).toBe(false);
  });

  it('asks the usefulness question only for T3', () => {
    expect(surveyAsksUsefulness(makeState(makeSession('T2')))).toBe(false);
    expect(surveyAsksUsefulness(makeState(makeSession('T3')))).toBe(true);
  });
});
