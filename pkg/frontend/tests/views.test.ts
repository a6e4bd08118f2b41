import { describe, expect, it, vi } from 'vitest';

import {
  renderIntroduction,
  renderReflectionSection,
  renderSandbox,
  renderSummary,
} from '../src/views.js';
import { makeInsight, makeIteration, makeSession, makeState, reflected } from './helpers.js';

const noopSandbox = {
  imageUrl: (id: string) => `/images/${id}`,
  onSubmitPrompt: () => {},
  onSubmitReflection: () => {},
};

const CARBON_TOKENS = ['co₂', 'co2', 'biogenic', 'per kg', 'a1a3', 'c1c4', 'impact'];

function q<T extends Element>(root: Element, selector: string): T {
  const node = root.querySelector<T>(selector);
  if (node === null) throw new Error(`missing ${selector}`);
  return node;
}

describe('introduction view', () => {
  it('keeps the start button disabled until consent and a label exist', () => {
    const view = renderIntroduction(makeState(null), { onStart: () => {} });
    const start = q<HTMLButtonElement>(view, '#start-button');
    const consent = q<HTMLInputElement>(view, '#consent');
    const label = q<HTMLInputElement>(view, '#participant-label');

    expect(start.disabled).toBe(true);

    consent.checked = true;
    consent.dispatchEvent(new Event('change'));
    expect(start.disabled).toBe(true);

    label.value = 'p1';
    label.dispatchEvent(new Event('input'));
    expect(start.disabled).toBe(false);

    consent.checked = false;
    consent.dispatchEvent(new Event('change'));
    expect(start.disabled).toBe(true);
  });

  it('hands the completed form to the handler', () => {
    const onStart = vi.fn();
    const view = renderIntroduction(makeState(null), { onStart });
    q<HTMLInputElement>(view, '#participant-label').value = ' p7 ';
    q<HTMLTextAreaElement>(view, '#background').value = 'architecture student';
    q<HTMLSelectElement>(view, '#condition').value = 'T2';
    q<HTMLInputElement>(view, '#consent').checked = true;
    q<HTMLInputElement>(view, '#consent').dispatchEvent(new Event('change'));
    q<HTMLButtonElement>(view, '#start-button').click();

    expect(onStart).toHaveBeenCalledWith({
      participantLabel: 'p7',
      background: 'architecture student',
      condition: 'T2',
    });
  });
});

describe('sandbox view', () => {
  it('renders ten metric rows for a ten-insight report', () => {
    const insights = Array.from({ length: 10 }, (_, i) => makeInsight(i + 1));
    const session = makeSession('T3', { iterations: [makeIteration(1, insights)] });
    const view = renderSandbox(makeState(session), noopSandbox);

    expect(view.querySelectorAll('.metrics-row')).toHaveLength(10);
    const firstHeadline = q(view, '.metrics-row .cell-headline');
    expect(firstHeadline.textContent).toBe('10.50 kg CO₂e / kg');
  });

  it('shows n/a where no per-kg figure exists', () => {
    const session = makeSession('T3', { iterations: [makeIteration(1, [makeInsight(3)])] });
    const view = renderSandbox(makeState(session), noopSandbox);
    expect(q(view, '.cell-per-kg').textContent).toBe('n/a');
  });

  it('shows a placeholder metrics panel before the first T3 generation', () => {
    const view = renderSandbox(makeState(makeSession('T3')), noopSandbox);
    expect(view.querySelector('.metrics-panel')).not.toBeNull();
    expect(view.querySelector('.metrics-placeholder')).not.toBeNull();
    expect(view.querySelectorAll('.metrics-row')).toHaveLength(0);
  });

  it('never mounts a metrics panel outside T3', () => {
    for (const condition of ['T1', 'T2']) {
      const session = makeSession(condition, { iterations: [makeIteration(1)] });
      const view = renderSandbox(makeState(session), noopSandbox);
      expect(view.querySelector('.metrics-panel')).toBeNull();
      const dom = view.innerHTML.toLowerCase();
      for (const token of CARBON_TOKENS) {
        expect(dom, `found ${token} in ${condition} sandbox`).not.toContain(token);
      }
    }
  });

  it('shows the goal text the service provided', () => {
    const session = makeSession('T2', { goalText: 'Consider sustainability as you design.' });
    const view = renderSandbox(makeState(session), noopSandbox);
    expect(q(view, '.goal-text').textContent).toContain('Consider sustainability');
  });

  it('requires a reflection before the next prompt', () => {
    const session = makeSession('T1', { iterations: [makeIteration(1)] });
    const view = renderSandbox(makeState(session), noopSandbox);
    expect(q<HTMLTextAreaElement>(view, '#prompt-input').disabled).toBe(true);
    expect(view.querySelector('#reflection-input')).not.toBeNull();

    session.reflections = reflected(1);
    const unlocked = renderSandbox(makeState(session), noopSandbox);
    expect(q<HTMLTextAreaElement>(unlocked, '#prompt-input').disabled).toBe(false);
    expect(unlocked.querySelector('#reflection-input')).toBeNull();
  });

  it('disables the prompt box after the fifth iteration', () => {
    const iterations = [1, 2, 3, 4, 5].map((i) => makeIteration(i));
    const session = makeSession('T1', { iterations, reflections: reflected(5) });
    const view = renderSandbox(makeState(session), noopSandbox);
    expect(q<HTMLTextAreaElement>(view, '#prompt-input').disabled).toBe(true);
    expect(q(view, '.lock-note').textContent).toContain('attempts are used');
    expect(q(view, '.attempt-counter').textContent).toBe('attempt 5 of 5');
  });

  it('renders a service failure as an error card', () => {
    const session = makeSession('T1', { iterations: [makeIteration(1)] });
    const state = makeState(session, { error: 'backend unavailable' });
    const view = renderSandbox(state, noopSandbox);
    expect(q(view, '.error-card').textContent).toBe('backend unavailable');
    expect(q(view, '.attempt-counter').textContent).toBe('attempt 1 of 5');
  });
});

describe('summary view', () => {
  it('renders one pair per iteration in order, without placeholders', () => {
    const session = makeSession('T1', { iterations: [makeIteration(1), makeIteration(2)] });
    const view = renderSummary(makeState(session), (id) => `/images/${id}`);
    const pairs = view.querySelectorAll('.pair');
    expect(pairs).toHaveLength(2);
    expect(pairs[0]?.getAttribute('data-index')).toBe('1');
    expect(pairs[1]?.getAttribute('data-index')).toBe('2');
    expect(q(view, '.pair .pair-prompt').textContent).toBe('prompt 1');
  });

  it('adds metrics columns only when reports carry insights', () => {
    const withMetrics = makeSession('T3', {
      iterations: [makeIteration(1, [makeInsight(1)])],
    });
    const without = makeSession('T2', { iterations: [makeIteration(1)] });

    const t3 = renderSummary(makeState(withMetrics), (id) => id);
    expect(t3.querySelector('.pair-metrics')).not.toBeNull();

    const t2 = renderSummary(makeState(without), (id) => id);
    expect(t2.querySelector('.pair-metrics')).toBeNull();
  });
});

describe('reflection view', () => {
  it('asks two questions for T1 and three for T3', () => {
    const t1 = renderReflectionSection(
      makeState(makeSession('T1', { iterations: [makeIteration(1)] })),
      { onFinalize: () => {} },
    );
    expect(t1.querySelectorAll('.choice-group')).toHaveLength(2);

    const t3 = renderReflectionSection(
      makeState(makeSession('T3', { iterations: [makeIteration(1)] })),
      { onFinalize: () => {} },
    );
    expect(t3.querySelectorAll('.choice-group')).toHaveLength(3);
  });

  it('submits nothing until the required choices are made', () => {
    const onFinalize = vi.fn();
    const view = renderReflectionSection(
      makeState(makeSession('T1', { iterations: [makeIteration(1)] })),
      { onFinalize },
    );
    q<HTMLButtonElement>(view, '#finalize-button').click();
    expect(onFinalize).not.toHaveBeenCalled();

    q<HTMLInputElement>(view, 'input[name="satisfaction"][value="yes"]').checked = true;
    q<HTMLInputElement>(view, 'input[name="sustainability"][value="no"]').checked = true;
    q<HTMLButtonElement>(view, '#finalize-button').click();
    expect(onFinalize).toHaveBeenCalledWith({
      satisfaction: 'yes',
      sustainabilityConsidered: 'no',
      insightsUseful: null,
      freeText: '',
    });
  });

  it('shows a read-only completion view with the status badge', () => {
    const session = makeSession('T1', {
      iterations: [makeIteration(1)],
      status: 'complete',
    });
    const view = renderReflectionSection(makeState(session), { onFinalize: () => {} });
    expect(q(view, '.status-badge').textContent).toBe('complete');
    expect(view.querySelector('#finalize-button')).toBeNull();
  });
});
