/**
 * Browser entry point. The service base URL comes from the page:
 * either a data-base-url attribute on the mount node or the page
 * origin when the UI is served next to the API.
 */

import { mount } from './app.js';

const root = document.getElementById('app');
if (root === null) {
  throw new Error('no #app element to mount into');
}

const baseUrl = root.dataset.baseUrl ?? window.location.origin;
const sessionId = new URLSearchParams(window.location.search).get('session') ?? undefined;

mount(root, { baseUrl, sessionId });
