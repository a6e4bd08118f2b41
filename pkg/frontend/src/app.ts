/**
 * Wizard controller: owns the state, talks to the service, re-renders
 * the active section into the root element after every change.
 */

import { ApiError, ServiceClient, type SessionJson } from './api.js';
import { el, text } from './dom.js';
import {
  SECTIONS,
  canEnter,
  initialState,
  type Section,
  type UiSessionState,
} from './state.js';
import {
  renderIntroduction,
  renderReflectionSection,
  renderSandbox,
  renderSummary,
} from './views.js';

export interface AppConfig {
  baseUrl: string;
  /** resume an existing session instead of starting at the intro */
  sessionId?: string;
}

const SECTION_LABELS: Record<Section, string> = {
  introduction: 'Introduction',
  sandbox: 'Data Collection',
  summary: 'Summary',
  reflection: 'Reflection',
};

export class App {
  readonly client: ServiceClient;
  state: UiSessionState;

  constructor(
    private readonly root: HTMLElement,
    config: AppConfig,
  ) {
    this.client = new ServiceClient(config.baseUrl);
    this.state = initialState();
    if (config.sessionId !== undefined) {
      this.state.session = { session_id: config.sessionId } as SessionJson;
    }
  }

  /** Fetch state (when resuming) and draw the first section. */
  async start(): Promise<void> {
    const existing = this.state.session;
    if (existing !== null) {
      const session = await this.client.getSession(existing.session_id);
      this.state.session = session;
      this.state.section = 'sandbox';
    }
    this.render();
  }

  private async withBusy(action: () => Promise<void>): Promise<void> {
    if (this.state.busy) return;
    this.state.busy = true;
    this.state.error = null;
    this.render();
    try {
      await action();
    } catch (err) {
      this.state.error = err instanceof ApiError ? err.message : String(err);
    } finally {
      this.state.busy = false;
      this.render();
    }
  }

  private navigate(section: Section): void {
    if (!canEnter(this.state, section)) return;
    this.state.section = section;
    this.state.error = null;
    this.render();
  }

  private async createSession(form: {
    participantLabel: string;
    background: string;
    condition: string;
  }): Promise<void> {
    await this.withBusy(async () => {
      this.state.session = await this.client.createSession(form);
      this.state.section = 'sandbox';
    });
  }

  private async submitPrompt(prompt: string): Promise<void> {
    const session = this.state.session;
    if (session === null) return;
    await this.withBusy(async () => {
      await this.client.submitIteration(session.session_id, prompt);
      this.state.session = await this.client.getSession(session.session_id);
    });
  }

  private async submitReflection(iteration: number, textValue: string): Promise<void> {
    const session = this.state.session;
    if (session === null) return;
    await this.withBusy(async () => {
      await this.client.addReflection(session.session_id, iteration, textValue);
      this.state.session = await this.client.getSession(session.session_id);
    });
  }

  private async finalize(survey: {
    satisfaction: string;
    sustainabilityConsidered: string;
    insightsUseful: string | null;
    freeText: string;
  }): Promise<void> {
    const session = this.state.session;
    if (session === null) return;
    await this.withBusy(async () => {
      this.state.session = await this.client.finalize(session.session_id, survey);
    });
  }

  private navBar(): HTMLElement {
    const buttons = SECTIONS.map((section) => {
      const button = el(
        'button',
        {
          class: 'nav-button',
          type: 'button',
          'data-section': section,
          disabled: !canEnter(this.state, section) || this.state.busy,
        },
        [SECTION_LABELS[section]],
      );
      if (section === this.state.section) button.classList.add('active');
      button.addEventListener('click', () => this.navigate(section));
      return button;
    });
    return el('nav', { class: 'wizard-nav' }, buttons);
  }

  private activeSection(): HTMLElement {
    switch (this.state.section) {
      case 'introduction':
        return renderIntroduction(this.state, {
          onStart: (form) => void this.createSession(form),
        });
      case 'sandbox':
        return renderSandbox(this.state, {
          imageUrl: (id) => this.client.imageUrl(id),
          onSubmitPrompt: (prompt) => void this.submitPrompt(prompt),
          onSubmitReflection: (iteration, value) =>
            void this.submitReflection(iteration, value),
        });
      case 'summary':
        return renderSummary(this.state, (id) => this.client.imageUrl(id));
      case 'reflection':
        return renderReflectionSection(this.state, {
          onFinalize: (survey) => void this.finalize(survey),
        });
    }
  }

  render(): void {
    this.root.replaceChildren();
    if (this.state.section === 'introduction' && this.state.error !== null) {
      this.root.append(text('div', 'error-banner', this.state.error));
    }
    this.root.append(this.navBar(), this.activeSection());
    if (this.state.busy) {
      this.root.append(text('div', 'busy-indicator', 'working'));
    }
  }
}

export function mount(root: HTMLElement, config: AppConfig): App {
  const app = new App(root, config);
  void app.start();
  return app;
}
