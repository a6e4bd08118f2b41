/** Tiny DOM builders. Text always goes through textContent, never markup. */

type Attrs = Record<string, string | boolean>;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Attrs = {},
  children: Array<Node | string> = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === 'boolean') {
      if (value) node.setAttribute(key, '');
      else node.removeAttribute(key);
      if (key === 'disabled' && 'disabled' in node) {
        (node as unknown as { disabled: boolean }).disabled = value;
      }
      if (key === 'checked' && node instanceof HTMLInputElement) {
        node.checked = value;
      }
    } else if (key === 'value' && 'value' in node) {
      (node as unknown as { value: string }).value = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    node.append(typeof child === 'string' ? document.createTextNode(child) : child);
  }
  return node;
}

export function text(tag: keyof HTMLElementTagNameMap, className: string, content: string): HTMLElement {
  return el(tag, { class: className }, [content]);
}

/** A labeled Yes / Somewhat / No radio group. */
export function choiceGroup(name: string, legend: string): HTMLFieldSetElement {
  const options = ['Yes', 'Somewhat', 'No'];
  return el('fieldset', { class: 'choice-group', 'data-question': name }, [
    el('legend', {}, [legend]),
    ...options.map((label) =>
      el('label', { class: 'choice-option' }, [
        el('input', { type: 'radio', name, value: label.toLowerCase() }),
        el('span', {}, [label]),
      ]),
    ),
  ]);
}

export function selectedChoice(root: ParentNode, name: string): string | null {
  const checked = root.querySelector<HTMLInputElement>(`input[name="${name}"]:checked`);
  return checked ? checked.value : null;
}
