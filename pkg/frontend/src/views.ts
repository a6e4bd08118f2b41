/**
 * The four wizard sections as pure render functions. Handlers are
 * injected so these stay testable without a live service.
 */

import type { InsightJson, IterationJson, SessionJson } from './api.js';
import { choiceGroup, el, selectedChoice, text } from './dom.js';
import {
  MAX_ATTEMPTS,
  attemptCounterText,
  goalText,
  isComplete,
  metricsPanelMounted,
  pendingReflection,
  promptLock,
  surveyAsksUsefulness,
  type UiSessionState,
} from './state.js';

export interface IntroHandlers {
  onStart(form: { participantLabel: string; background: string; condition: string }): void;
}

export function renderIntroduction(state: UiSessionState, handlers: IntroHandlers): HTMLElement {
  const labelInput = el('input', { id: 'participant-label', type: 'text' });
  const backgroundInput = el('textarea', { id: 'background', rows: '3' });
  const conditionSelect = el('select', { id: 'condition' }, [
    el('option', { value: 'T1' }, ['T1']),
    el('option', { value: 'T2' }, ['T2']),
    el('option', { value: 'T3' }, ['T3']),
  ]);
  const consent = el('input', { id: 'consent', type: 'checkbox' });
  const start = el('button', { id: 'start-button', type: 'button', disabled: true }, [
    'Start session',
  ]);

  const refreshGate = () => {
    start.disabled = !(consent.checked && labelInput.value.trim() !== '') || state.busy;
  };
  consent.addEventListener('change', refreshGate);
  labelInput.addEventListener('input', refreshGate);

  start.addEventListener('click', () => {
    handlers.onStart({
      participantLabel: labelInput.value.trim(),
      background: backgroundInput.value.trim(),
      condition: conditionSelect.value,
    });
  });

  return el('section', { class: 'section-introduction' }, [
    text('h2', 'section-title', 'Introduction'),
    el('p', {}, [
      'You will iterate on a generated interior design for up to ',
      `${MAX_ATTEMPTS} attempts, then answer a short survey.`,
    ]),
    el('div', { class: 'field' }, [el('label', { for: 'participant-label' }, ['Participant label']), labelInput]),
    el('div', { class: 'field' }, [el('label', { for: 'background' }, ['Design background']), backgroundInput]),
    el('div', { class: 'field' }, [el('label', { for: 'condition' }, ['Condition']), conditionSelect]),
    el('label', { class: 'consent-row' }, [
      consent,
      el('span', {}, ['I consent to my pseudonymous session data being recorded for research.']),
    ]),
    start,
  ]);
}

function metricsTable(insights: InsightJson[]): HTMLElement {
  const header = el('tr', {}, [
    ...['#', 'material seen', 'matched record', 'embodied CO₂e', 'stored CO₂', 'per kg'].map(
      (label) => el('th', {}, [label]),
    ),
  ]);
  const rows = insights.map((insight) => {
    const perKg =
      insight.carbon.per_kg === null
        ? 'n/a'
        : `${insight.carbon.per_kg.value.toFixed(4)} ${insight.carbon.per_kg.unit_label}`;
    return el('tr', { class: 'metrics-row' }, [
      el('td', {}, [String(insight.rank)]),
      el('td', { class: 'cell-description' }, [insight.description]),
      el('td', { class: 'cell-matched' }, [`record ${insight.match.record_id}`]),
      el('td', { class: 'cell-headline' }, [
        `${insight.carbon.raw.value.toFixed(2)} ${insight.carbon.raw.unit_label}`,
      ]),
      el('td', { class: 'cell-biogenic' }, [insight.carbon.biogenic.toFixed(2)]),
      el('td', { class: 'cell-per-kg' }, [perKg]),
    ]);
  });
  return el('table', { class: 'metrics-table' }, [header, ...rows]);
}

/** The metrics panel only exists for sessions whose condition shows
 * metrics; for everything else this function is never called. */
function metricsPanel(iteration: IterationJson | null): HTMLElement {
  const panel = el('div', { class: 'metrics-panel' }, [
    text('h3', 'panel-title', 'Material impact'),
  ]);
  const insights = iteration?.report.insights;
  if (insights === undefined) {
    panel.append(text('p', 'metrics-placeholder', 'Figures appear after your first generation.'));
  } else {
    panel.append(metricsTable(insights));
    if (iteration?.report.shortfall) {
      panel.append(text('p', 'shortfall-note', 'Fewer than ten materials were recognized.'));
    }
  }
  return panel;
}

export interface SandboxHandlers {
  imageUrl(imageId: string): string;
  onSubmitPrompt(prompt: string): void;
  onSubmitReflection(iteration: number, textValue: string): void;
}

export function renderSandbox(state: UiSessionState, handlers: SandboxHandlers): HTMLElement {
  const session = state.session as SessionJson;
  const lock = promptLock(state);
  const latest = session.iterations.length
    ? session.iterations[session.iterations.length - 1] ?? null
    : null;

  const promptInput = el('textarea', {
    id: 'prompt-input',
    rows: '3',
    disabled: lock.locked,
  });
  const submit = el('button', { id: 'submit-prompt', type: 'button', disabled: lock.locked }, [
    'Generate',
  ]);
  submit.addEventListener('click', () => {
    const prompt = promptInput.value.trim();
    if (prompt !== '') handlers.onSubmitPrompt(prompt);
  });

  const parts: Array<Node> = [
    text('h2', 'section-title', 'Data Collection'),
    text('div', 'attempt-counter', `attempt ${attemptCounterText(state)}`),
  ];

  const goal = goalText(state);
  if (goal !== '') {
    parts.push(text('p', 'goal-text', goal));
  }

  if (state.error !== null) {
    parts.push(text('div', 'error-card', state.error));
  }

  parts.push(
    el('div', { class: 'prompt-form' }, [
      el('label', { for: 'prompt-input' }, ['Describe the space you want']),
      promptInput,
      submit,
    ]),
  );

  if (lock.locked && lock.reason === 'attempts_exhausted') {
    parts.push(
      text('p', 'lock-note', `All ${MAX_ATTEMPTS} attempts are used; continue to the summary.`),
    );
  }
  if (lock.locked && lock.reason === 'complete') {
    parts.push(text('p', 'lock-note', 'This session is finished.'));
  }

  if (latest !== null) {
    const view = el('div', { class: 'iteration-view' }, [
      text('h3', 'panel-title', `Generation ${latest.index}`),
      el('img', {
        class: 'iteration-image',
        src: handlers.imageUrl(latest.report.image.image_id),
        alt: `generated design ${latest.index}`,
      }),
      text('p', 'iteration-prompt', latest.prompt),
    ]);
    parts.push(view);
  }

  if (metricsPanelMounted(state)) {
    parts.push(metricsPanel(latest));
  }

  const due = pendingReflection(state);
  if (due !== null && !isComplete(state)) {
    const reflectionInput = el('textarea', { id: 'reflection-input', rows: '2' });
    const reflectionSubmit = el(
      'button',
      { id: 'submit-reflection', type: 'button', disabled: state.busy },
      ['Save reflection'],
    );
    reflectionSubmit.addEventListener('click', () => {
      const value = reflectionInput.value.trim();
      if (value !== '') handlers.onSubmitReflection(due, value);
    });
    parts.push(
      el('div', { class: 'reflection-form' }, [
        el('label', { for: 'reflection-input' }, [
          `Reflect on generation ${due} before your next attempt`,
        ]),
        reflectionInput,
        reflectionSubmit,
      ]),
    );
  }

  return el('section', { class: 'section-sandbox' }, parts);
}

export function renderSummary(state: UiSessionState, imageUrl: (id: string) => string): HTMLElement {
  const session = state.session as SessionJson;
  const pairs = session.iterations.map((iteration) => {
    const card: Array<Node> = [
      el('img', {
        class: 'pair-image',
        src: imageUrl(iteration.report.image.image_id),
        alt: `generated design ${iteration.index}`,
      }),
      text('p', 'pair-prompt', iteration.prompt),
    ];
    const insights = iteration.report.insights;
    if (insights !== undefined) {
      card.push(
        el(
          'ul',
          { class: 'pair-metrics' },
          insights.map((insight) =>
            el('li', {}, [
              `${insight.description}: ${insight.carbon.raw.value.toFixed(2)} ${insight.carbon.raw.unit_label}`,
            ]),
          ),
        ),
      );
    }
    return el('div', { class: 'pair', 'data-index': String(iteration.index) }, card);
  });

  return el('section', { class: 'section-summary' }, [
    text('h2', 'section-title', 'Summary'),
    el('div', { class: 'summary-grid' }, pairs),
  ]);
}

export interface ReflectionHandlers {
  onFinalize(survey: {
    satisfaction: string;
    sustainabilityConsidered: string;
    insightsUseful: string | null;
    freeText: string;
  }): void;
}

export function renderReflectionSection(
  state: UiSessionState,
  handlers: ReflectionHandlers,
): HTMLElement {
  const session = state.session as SessionJson;

  if (isComplete(state)) {
    return el('section', { class: 'section-reflection' }, [
      text('h2', 'section-title', 'Reflection'),
      text('span', 'status-badge', session.status),
      text('p', 'completion-note', 'Thank you; your responses are recorded.'),
    ]);
  }

  const form = el('section', { class: 'section-reflection' }, [
    text('h2', 'section-title', 'Reflection'),
  ]);
  if (state.error !== null) {
    form.append(text('div', 'error-card', state.error));
  }
  form.append(choiceGroup('satisfaction', 'How satisfied are you with your final design?'));
  form.append(
    choiceGroup('sustainability', 'Did you consider sustainability while designing?'),
  );
  if (surveyAsksUsefulness(state)) {
    form.append(choiceGroup('useful', 'Were the material impact figures useful?'));
  }
  const freeText = el('textarea', { id: 'survey-free-text', rows: '3' });
  const finalize = el('button', { id: 'finalize-button', type: 'button', disabled: state.busy }, [
    'Finish session',
  ]);
  finalize.addEventListener('click', () => {
    const satisfaction = selectedChoice(form, 'satisfaction');
    const sustainability = selectedChoice(form, 'sustainability');
    const useful = surveyAsksUsefulness(state) ? selectedChoice(form, 'useful') : null;
    if (satisfaction === null || sustainability === null) return;
    if (surveyAsksUsefulness(state) && useful === null) return;
    handlers.onFinalize({
      satisfaction,
      sustainabilityConsidered: sustainability,
      insightsUseful: useful,
      freeText: freeText.value.trim(),
    });
  });
  form.append(
    el('div', { class: 'field' }, [
      el('label', { for: 'survey-free-text' }, ['Anything else about the process?']),
      freeText,
    ]),
    finalize,
  );
  return form;
}
