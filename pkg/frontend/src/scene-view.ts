/** Scene setup panel: load scenes, toggle features, apply and extract presets. */

import type { Gateway } from "./api.js";
import { describeError, el, type Notify } from "./dom.js";
import type {
  AttachmentInfo,
  EntityInfo,
  PresetDoc,
  SceneSnapshot,
} from "./types.js";

export class SceneView {
  private snapshot: SceneSnapshot | null = null;
  private presets: PresetDoc[] = [];

  constructor(
    private root: HTMLElement,
    private client: Gateway,
    private notify: Notify,
  ) {}

  async refresh(): Promise<void> {
    this.snapshot = await this.client.getScene();
    this.presets = await this.client.listPresets();
    this.render();
  }

  /** Run a mutation, surface errors, and re-render from fresh state. */
  private async mutate(op: () => Promise<unknown>): Promise<void> {
    try {
      await op();
      await this.refresh();
    } catch (err) {
      this.notify(describeError(err), true);
    }
  }

  private render(): void {
    const snap = this.snapshot;
    if (!snap) return;
    this.root.textContent = "";
    this.root.appendChild(this.renderHeader(snap));
    for (const entity of snap.entities) {
      this.root.appendChild(this.renderEntity(entity));
    }
  }

  private renderHeader(snap: SceneSnapshot): HTMLElement {
    const card = el("div", "card scene-header");
    const title = el("div", "card-title", `Scene: ${snap.scene}`);
    title.appendChild(el("span", "chip", snap.theme));
    card.appendChild(title);

    const row = el("div", "row");
    const select = el("select", "scene-select");
    select.id = "scene-select";
    for (const name of snap.builtin_scenes) {
      const opt = el("option", "", name);
      opt.value = name;
      select.appendChild(opt);
    }
    select.value = snap.scene;
    const load = el("button", "", "Load");
    load.id = "scene-load";
    load.addEventListener("click", () => {
      void this.mutate(() => this.client.loadScene(select.value));
    });
    row.appendChild(select);
    row.appendChild(load);
    card.appendChild(row);
    return card;
  }

  private renderEntity(entity: EntityInfo): HTMLElement {
    const card = el("div", "card entity");
    card.dataset.entity = entity.id;
    const title = el("div", "card-title", entity.name);
    title.appendChild(el("span", "chip", entity.id));
    card.appendChild(title);

    for (const att of entity.attachments) {
      card.appendChild(this.renderAttachment(entity, att));
    }

    if (entity.available_extensions.length) {
      const row = el("div", "row extensions");
      row.appendChild(el("span", "label", "add:"));
      for (const ext of entity.available_extensions) {
        const btn = el("button", "extension-add", `+ ${ext}`);
        btn.dataset.type = ext;
        btn.addEventListener("click", () => {
          void this.mutate(() => this.client.toggleFeature(entity.id, ext, true));
        });
        row.appendChild(btn);
      }
      card.appendChild(row);
    }
    return card;
  }

  private renderAttachment(entity: EntityInfo, att: AttachmentInfo): HTMLElement {
    const block = el("div", "attachment");
    block.dataset.type = att.type;

    const head = el("div", "row attachment-head");
    const toggle = el("input", "att-toggle");
    toggle.type = "checkbox";
    toggle.checked = att.enabled;
    toggle.addEventListener("change", () => {
      void this.mutate(() =>
        this.client.toggleFeature(entity.id, att.type, toggle.checked),
      );
    });
    head.appendChild(toggle);
    head.appendChild(el("strong", "", att.type));
    head.appendChild(el("span", "chip", att.category));
    block.appendChild(head);

    const table = el("table", "fields");
    for (const field of att.fields) {
      const tr = el("tr");
      tr.appendChild(el("td", "field-name", field.name));
      const value = att.values[field.name];
      tr.appendChild(
        el("td", "field-value", typeof value === "string" ? value : JSON.stringify(value)),
      );
      tr.appendChild(el("td", "field-unit", field.unit));
      table.appendChild(tr);
    }
    block.appendChild(table);

    const matching = this.presets.filter((p) => p.target_type === att.type);
    if (matching.length) {
      const row = el("div", "row preset-row");
      const select = el("select", "preset-select");
      for (const preset of matching) {
        const opt = el("option", "", preset.preset_name);
        opt.value = preset.preset_name;
        select.appendChild(opt);
      }
      const apply = el("button", "preset-apply", "Apply preset");
      apply.addEventListener("click", () => {
        const doc = matching.find((p) => p.preset_name === select.value);
        if (doc) void this.applyPreset(entity.id, doc);
      });
      row.appendChild(select);
      row.appendChild(apply);
      block.appendChild(row);
    }

    block.appendChild(this.renderExtract(entity, att));
    return block;
  }

  private async applyPreset(entityId: string, doc: PresetDoc): Promise<void> {
    try {
      const res = await this.client.applyPreset(entityId, doc);
      if (res.warnings.length) {
        this.notify(`applied ${doc.preset_name}: ${res.warnings.join("; ")}`);
      } else {
        this.notify(`applied ${doc.preset_name}`);
      }
      await this.refresh();
    } catch (err) {
      this.notify(describeError(err), true);
    }
  }

  /** Extract control: the name is validated live and gates the button. */
  private renderExtract(entity: EntityInfo, att: AttachmentInfo): HTMLElement {
    const row = el("div", "row extract-row");
    const input = el("input", "extract-name");
    input.type = "text";
    input.placeholder = "new preset name";
    const status = el("span", "name-status");
    const button = el("button", "extract-btn", "Extract");
    button.disabled = true;
    const result = el("pre", "extract-result");

    input.addEventListener("input", () => {
      void this.checkName(input, status, button);
    });
    button.addEventListener("click", () => {
      void (async () => {
        try {
          const doc = await this.client.extractPreset(entity.id, att.type, input.value);
          result.textContent = JSON.stringify(doc, null, 2);
          this.notify(`extracted ${doc.preset_name}`);
        } catch (err) {
          this.notify(describeError(err), true);
        }
      })();
    });

    row.appendChild(input);
    row.appendChild(status);
    row.appendChild(button);
    const wrap = el("div", "extract");
    wrap.appendChild(row);
    wrap.appendChild(result);
    return wrap;
  }

  private async checkName(
    input: HTMLInputElement,
    status: HTMLElement,
    button: HTMLButtonElement,
  ): Promise<void> {
    const name = input.value;
    if (!name) {
      status.textContent = "";
      button.disabled = true;
      return;
    }
    try {
      const verdict = await this.client.validateName(name);
      status.textContent = verdict;
      status.className = `name-status ${verdict === "ok" ? "ok" : "bad"}`;
      button.disabled = verdict !== "ok";
    } catch (err) {
      this.notify(describeError(err), true);
    }
  }
}
