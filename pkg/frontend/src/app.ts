/**
 * DOM wiring for the search console.
 *
 * One page, three panels: concept search with autocomplete, the
 * relationship cascade, and quality filters. The session (seeds, operator,
 * expansion, filters) is mirrored into the URL fragment after every change
 * so the current search is always a copyable link.
 */

import {
  ApiError,
  isAbort,
  LatestWins,
  type RemoteCandidate,
  type SearchResponse,
  type Suggestion,
} from "./api.js";
import { CascadePicker, type CascadeApi } from "./cascade.js";
import { debounce, SUGGEST_DEBOUNCE_MS, type Debounced } from "./debounce.js";
import { isRangeError, parseRange, QUALITY_CHARACTERISTICS } from "./quality.js";
import {
  decodeSession,
  encodeSession,
  executeSession,
  planRequest,
  type FilterScope,
  type SearchSession,
  type SessionSearchApi,
  type SessionSeed,
} from "./session.js";
import { escapeHtml, renderTable, renderWarnings } from "./table.js";

/** Everything the app calls on the API client; tests stub this. */
export interface AppApi extends SessionSearchApi, CascadeApi {
  suggest(q: string, limit?: number, signal?: AbortSignal): Promise<{ suggestions: Suggestion[] }>;
  remoteConcepts(q: string, signal?: AbortSignal): Promise<{ candidates: RemoteCandidate[] }>;
}

export interface UrlState {
  read(): string;
  write(encoded: string): void;
}

/** Session-in-fragment storage, the browser implementation of UrlState. */
export function hashUrlState(win: Window): UrlState {
  return {
    read: () => win.location.hash.replace(/^#/, ""),
    write: (encoded) => win.history.replaceState(null, "", `#${encoded}`),
  };
}

const SKELETON = `
<h1>Collection search</h1>
<div id="banner" class="banner" hidden></div>

<section class="panel">
  <h2>Concept search</h2>
  <div class="suggest-box">
    <input id="seed-query" type="text" placeholder="Type a concept name" autocomplete="off">
    <button id="remote-btn" type="button" class="advisory-btn" title="Ask the remote terminology service; results are advisory and may not be in this repository">Remote lookup</button>
    <div id="suggest-list" class="suggest-list" hidden></div>
  </div>
  <ul id="seed-list" class="seed-list"></ul>
  <div class="controls">
    <label>Operator
      <select id="operator">
        <option value="OR">OR</option>
        <option value="AND">AND</option>
      </select>
    </label>
    <label><input id="expansion" type="checkbox" checked> Include related concepts</label>
    <button id="search-btn" type="button" disabled>Search</button>
  </div>
</section>

<section class="panel">
  <h2>Relationship search</h2>
  <div class="controls">
    <label>Vocabulary <select id="vocab-select"><option value=""></option></select></label>
    <label>Relationship <select id="rel-select" disabled><option value=""></option></select></label>
    <label>Attributing concept <select id="concept-select" disabled><option value=""></option></select></label>
    <button id="rel-search-btn" type="button" disabled>Search</button>
  </div>
  <p id="cascade-note" class="empty-state" hidden></p>
</section>

<section class="panel">
  <h2>Quality filter</h2>
  <div class="controls">
    <label>Scope
      <select id="qf-scope">
        <option value="collection">collection</option>
        <option value="attribute">attribute (first seed)</option>
      </select>
    </label>
    <label>Characteristic <select id="qf-char"></select></label>
    <label>Min <input id="qf-min" type="number" min="0" max="1" step="0.05" value="0"></label>
    <label>Max <input id="qf-max" type="number" min="0" max="1" step="0.05" value="1"></label>
    <button id="qf-apply" type="button">Apply</button>
    <button id="qf-clear" type="button">Clear filters</button>
  </div>
  <span id="qf-error" class="field-error" hidden></span>
  <ul id="qf-active" class="filter-list"></ul>
</section>

<section class="panel">
  <h2>Results</h2>
  <div id="warnings"></div>
  <div id="results"></div>
</section>
`;

function byId<T extends HTMLElement>(doc: Document, id: string): T {
  const el = doc.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

export class App {
  session: SearchSession;
  readonly picker: CascadePicker;
  /** Resolves once the deep-linked search (if any) and the cascade ran. */
  readonly ready: Promise<void>;
  lastResponse: SearchResponse | null = null;

  private readonly searchChannel = new LatestWins();
  private readonly suggestChannel = new LatestWins();
  private readonly cascadeChannel = new LatestWins();
  private readonly debouncedSuggest: Debounced<[string]>;

  private readonly banner: HTMLElement;
  private readonly seedQuery: HTMLInputElement;
  private readonly suggestList: HTMLElement;
  private readonly seedList: HTMLElement;
  private readonly operatorSelect: HTMLSelectElement;
  private readonly expansionBox: HTMLInputElement;
  private readonly searchBtn: HTMLButtonElement;
  private readonly vocabSelect: HTMLSelectElement;
  private readonly relSelect: HTMLSelectElement;
  private readonly conceptSelect: HTMLSelectElement;
  private readonly relSearchBtn: HTMLButtonElement;
  private readonly cascadeNote: HTMLElement;
  private readonly qfScope: HTMLSelectElement;
  private readonly qfChar: HTMLSelectElement;
  private readonly qfMin: HTMLInputElement;
  private readonly qfMax: HTMLInputElement;
  private readonly qfError: HTMLElement;
  private readonly qfActive: HTMLElement;
  private readonly warningsEl: HTMLElement;
  private readonly resultsEl: HTMLElement;

  constructor(
    private readonly doc: Document,
    private readonly client: AppApi,
    private readonly urlState: UrlState,
  ) {
    const root = doc.getElementById("app") ?? doc.body;
    root.innerHTML = SKELETON;

    this.banner = byId(doc, "banner");
    this.seedQuery = byId<HTMLInputElement>(doc, "seed-query");
    this.suggestList = byId(doc, "suggest-list");
    this.seedList = byId(doc, "seed-list");
    this.operatorSelect = byId<HTMLSelectElement>(doc, "operator");
    this.expansionBox = byId<HTMLInputElement>(doc, "expansion");
    this.searchBtn = byId<HTMLButtonElement>(doc, "search-btn");
    this.vocabSelect = byId<HTMLSelectElement>(doc, "vocab-select");
    this.relSelect = byId<HTMLSelectElement>(doc, "rel-select");
    this.conceptSelect = byId<HTMLSelectElement>(doc, "concept-select");
    this.relSearchBtn = byId<HTMLButtonElement>(doc, "rel-search-btn");
    this.cascadeNote = byId(doc, "cascade-note");
    this.qfScope = byId<HTMLSelectElement>(doc, "qf-scope");
    this.qfChar = byId<HTMLSelectElement>(doc, "qf-char");
    this.qfMin = byId<HTMLInputElement>(doc, "qf-min");
    this.qfMax = byId<HTMLInputElement>(doc, "qf-max");
    this.qfError = byId(doc, "qf-error");
    this.qfActive = byId(doc, "qf-active");
    this.warningsEl = byId(doc, "warnings");
    this.resultsEl = byId(doc, "results");

    this.qfChar.innerHTML = QUALITY_CHARACTERISTICS.map(
      (c) => `<option value="${c}">${c}</option>`,
    ).join("");

    this.picker = new CascadePicker(client);
    this.debouncedSuggest = debounce((q: string) => {
      void this.loadSuggestions(q);
    }, SUGGEST_DEBOUNCE_MS);

    this.session = decodeSession(urlState.read());
    this.renderSession();
    this.renderResults();
    this.bindEvents();

    this.ready = this.start();
  }

  private async start(): Promise<void> {
    if (planRequest(this.session).kind !== "none") {
      await this.runSearch();
    }
    await this.initCascade();
  }

  // -- session sync and rendering --------------------------------------

  private syncUrl(): void {
    this.urlState.write(encodeSession(this.session));
  }

  private renderSession(): void {
    this.operatorSelect.value = this.session.operator;
    this.expansionBox.checked = this.session.expansion;
    this.renderSeeds();
    this.renderFilters();
  }

  private renderSeeds(): void {
    this.seedList.innerHTML = this.session.seeds
      .map((seed, idx) => {
        const label = seed.name === "" ? seed.code : seed.name;
        return (
          `<li class="seed-chip">` +
          `<span>${escapeHtml(label)}</span> ` +
          `<small>(${escapeHtml(seed.code)}, ${escapeHtml(seed.vocabulary)})</small>` +
          `<button type="button" data-remove-seed="${idx}" aria-label="remove seed">&times;</button>` +
          `</li>`
        );
      })
      .join("");
    this.searchBtn.disabled = this.session.seeds.length === 0;
  }

  private renderFilters(): void {
    this.qfActive.innerHTML = this.session.filters
      .map(
        (f, idx) =>
          `<li class="filter-chip">` +
          `${escapeHtml(f.scope)} ${escapeHtml(f.characteristic)} in [${f.min}, ${f.max}]` +
          `<button type="button" data-remove-filter="${idx}" aria-label="remove filter">&times;</button>` +
          `</li>`,
      )
      .join("");
  }

  private renderResults(): void {
    this.resultsEl.innerHTML = renderTable(this.lastResponse);
    this.warningsEl.innerHTML = renderWarnings(this.lastResponse?.warnings ?? []);
  }

  private showBanner(message: string, details: string[] = []): void {
    const extra = details.length > 0 ? ` (${details.join("; ")})` : "";
    this.banner.textContent = `${message}${extra}`;
    this.banner.hidden = false;
  }

  private hideBanner(): void {
    this.banner.hidden = true;
    this.banner.textContent = "";
  }

  // -- searching --------------------------------------------------------

  async runSearch(): Promise<void> {
    const plan = planRequest(this.session);
    if (plan.kind === "none") {
      this.lastResponse = null;
      this.renderResults();
      return;
    }
    const signal = this.searchChannel.next();
    let response: SearchResponse | null;
    try {
      response = await executeSession(this.client, this.session, signal);
    } catch (error) {
      if (isAbort(error)) {
        return;
      }
      if (error instanceof ApiError) {
        this.showBanner(error.message, error.details);
        return; // prior results stay on screen
      }
      this.showBanner(String(error));
      return;
    }
    this.hideBanner();
    this.lastResponse = response;
    this.renderResults();
  }

  private async runRelationshipSearch(): Promise<void> {
    if (!this.picker.canSearch()) {
      return;
    }
    const signal = this.searchChannel.next();
    try {
      const response = await this.picker.search(signal);
      this.hideBanner();
      this.lastResponse = response;
      this.renderResults();
    } catch (error) {
      if (isAbort(error)) {
        return;
      }
      if (error instanceof ApiError) {
        this.showBanner(error.message, error.details);
        return;
      }
      this.showBanner(String(error));
    }
  }

  // -- seeds and autocomplete -------------------------------------------

  addSeed(seed: SessionSeed): void {
    const exists = this.session.seeds.some(
      (s) => s.code === seed.code && s.vocabulary === seed.vocabulary,
    );
    if (!exists) {
      this.session.seeds.push(seed);
      this.renderSeeds();
      this.syncUrl();
    }
  }

  private removeSeed(idx: number): void {
    this.session.seeds.splice(idx, 1);
    this.renderSeeds();
    this.syncUrl();
  }

  private hideSuggestions(): void {
    this.suggestList.hidden = true;
    this.suggestList.innerHTML = "";
  }

  private suggestionItem(c: Suggestion | RemoteCandidate, advisory: boolean): string {
    const cls = advisory ? "suggest-item advisory" : "suggest-item";
    const badge = advisory
      ? `<span class="remote-badge">remote</span>`
      : `<span class="count-badge">${(c as Suggestion).count}</span>`;
    return (
      `<div class="${cls}" data-code="${escapeHtml(c.code)}"` +
      ` data-vocab="${escapeHtml(c.vocabulary)}" data-name="${escapeHtml(c.name)}">` +
      `${escapeHtml(c.name)} <small>(${escapeHtml(c.code)}, ${escapeHtml(c.vocabulary)})</small>` +
      badge +
      `</div>`
    );
  }

  private async loadSuggestions(q: string): Promise<void> {
    if (q.trim() === "") {
      this.suggestChannel.cancel();
      this.hideSuggestions();
      return;
    }
    const signal = this.suggestChannel.next();
    try {
      const response = await this.client.suggest(q, 8, signal);
      this.suggestList.innerHTML = response.suggestions
        .map((s) => this.suggestionItem(s, false))
        .join("");
      this.suggestList.hidden = false;
    } catch (error) {
      if (!isAbort(error)) {
        this.hideSuggestions();
      }
    }
  }

  private async loadRemoteCandidates(): Promise<void> {
    const q = this.seedQuery.value;
    if (q.trim() === "") {
      return;
    }
    this.debouncedSuggest.cancel();
    const signal = this.suggestChannel.next();
    try {
      const response = await this.client.remoteConcepts(q, signal);
      const items = response.candidates.map((c) => this.suggestionItem(c, true)).join("");
      this.suggestList.innerHTML =
        items === "" ? `<div class="suggest-note advisory">no remote matches</div>` : items;
      this.suggestList.hidden = false;
    } catch (error) {
      if (isAbort(error)) {
        return;
      }
      const message = error instanceof ApiError ? error.message : String(error);
      this.suggestList.innerHTML = `<div class="suggest-note advisory">remote lookup unavailable: ${escapeHtml(message)}</div>`;
      this.suggestList.hidden = false;
    }
  }

  // -- cascade ------------------------------------------------------------

  private async initCascade(): Promise<void> {
    try {
      await this.picker.loadVocabularies();
    } catch (error) {
      if (!isAbort(error)) {
        this.cascadeNote.textContent = "vocabulary list unavailable";
        this.cascadeNote.hidden = false;
      }
      return;
    }
    this.vocabSelect.innerHTML =
      `<option value=""></option>` +
      this.picker.state.vocabularies
        .map((v) => `<option value="${escapeHtml(v.id)}">${escapeHtml(v.id)}</option>`)
        .join("");
  }

  private refreshCascadeControls(): void {
    const state = this.picker.state;

    this.relSelect.innerHTML =
      `<option value=""></option>` +
      state.relationships
        .map((r) => `<option value="${escapeHtml(r)}">${escapeHtml(r)}</option>`)
        .join("");
    this.relSelect.disabled = state.vocabulary === null || state.relationships.length === 0;
    this.relSelect.value = state.relationship ?? "";

    this.conceptSelect.innerHTML =
      `<option value=""></option>` +
      state.concepts
        .map(
          (c, idx) =>
            `<option value="${idx}">${escapeHtml(`${c.name} (${c.code})`)}</option>`,
        )
        .join("");
    this.conceptSelect.disabled = state.relationship === null || state.concepts.length === 0;

    this.relSearchBtn.disabled = !this.picker.canSearch();

    let note = "";
    if (state.vocabulary !== null && state.relationships.length === 0) {
      note = `${state.vocabulary} has no attributing relationships.`;
    } else if (state.relationship !== null && state.concepts.length === 0) {
      note = `No concepts attribute "${state.relationship}" in ${state.vocabulary}.`;
    }
    this.cascadeNote.textContent = note;
    this.cascadeNote.hidden = note === "";
  }

  private async onVocabularyChange(): Promise<void> {
    const id = this.vocabSelect.value === "" ? null : this.vocabSelect.value;
    const signal = this.cascadeChannel.next();
    try {
      await this.picker.selectVocabulary(id, signal);
    } catch (error) {
      if (!isAbort(error)) {
        this.showBanner(error instanceof ApiError ? error.message : String(error));
      }
      return;
    }
    this.refreshCascadeControls();
  }

  private async onRelationshipChange(): Promise<void> {
    const name = this.relSelect.value === "" ? null : this.relSelect.value;
    const signal = this.cascadeChannel.next();
    try {
      await this.picker.selectRelationship(name, signal);
    } catch (error) {
      if (!isAbort(error)) {
        this.showBanner(error instanceof ApiError ? error.message : String(error));
      }
      return;
    }
    this.refreshCascadeControls();
  }

  private onConceptChange(): void {
    const idx = this.conceptSelect.value === "" ? -1 : Number(this.conceptSelect.value);
    this.picker.selectConcept(this.picker.state.concepts[idx] ?? null);
    this.relSearchBtn.disabled = !this.picker.canSearch();
  }

  // -- quality filters ------------------------------------------------------

  private applyFilter(): void {
    const parsed = parseRange(this.qfMin.value, this.qfMax.value);
    if (isRangeError(parsed)) {
      this.qfError.textContent = parsed.error;
      this.qfError.hidden = false;
      return; // invalid range: no request leaves the page
    }
    const scope = this.qfScope.value as FilterScope;
    if (scope === "attribute" && this.session.seeds.length === 0) {
      this.qfError.textContent = "attribute scope needs a seed concept first";
      this.qfError.hidden = false;
      return;
    }
    this.qfError.hidden = true;
    this.qfError.textContent = "";
    this.session.filters.push({
      scope,
      characteristic: this.qfChar.value,
      min: parsed.min,
      max: parsed.max,
    });
    this.renderFilters();
    this.syncUrl();
    void this.runSearch();
  }

  private clearFilters(): void {
    this.session.filters = [];
    this.qfError.hidden = true;
    this.qfError.textContent = "";
    this.renderFilters();
    this.syncUrl();
    void this.runSearch();
  }

  private removeFilter(idx: number): void {
    this.session.filters.splice(idx, 1);
    this.renderFilters();
    this.syncUrl();
    void this.runSearch();
  }

  // -- event wiring -----------------------------------------------------

  private bindEvents(): void {
    this.seedQuery.addEventListener("input", () => {
      this.debouncedSuggest(this.seedQuery.value);
    });
    byId<HTMLButtonElement>(this.doc, "remote-btn").addEventListener("click", () => {
      void this.loadRemoteCandidates();
    });
    this.suggestList.addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      const item = target.closest<HTMLElement>(".suggest-item");
      if (item === null) {
        return;
      }
      this.addSeed({
        code: item.getAttribute("data-code") ?? "",
        vocabulary: item.getAttribute("data-vocab") ?? "",
        name: item.getAttribute("data-name") ?? "",
      });
      this.seedQuery.value = "";
      this.hideSuggestions();
    });
    this.seedList.addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      const raw = target.getAttribute("data-remove-seed");
      if (raw !== null) {
        this.removeSeed(Number(raw));
      }
    });
    this.operatorSelect.addEventListener("change", () => {
      this.session.operator = this.operatorSelect.value === "AND" ? "AND" : "OR";
      this.syncUrl();
      void this.runSearch();
    });
    this.expansionBox.addEventListener("change", () => {
      this.session.expansion = this.expansionBox.checked;
      this.syncUrl();
      void this.runSearch();
    });
    this.searchBtn.addEventListener("click", () => {
      void this.runSearch();
    });

    this.vocabSelect.addEventListener("change", () => {
      void this.onVocabularyChange();
    });
    this.relSelect.addEventListener("change", () => {
      void this.onRelationshipChange();
    });
    this.conceptSelect.addEventListener("change", () => {
      this.onConceptChange();
    });
    this.relSearchBtn.addEventListener("click", () => {
      void this.runRelationshipSearch();
    });

    byId<HTMLButtonElement>(this.doc, "qf-apply").addEventListener("click", () => {
      this.applyFilter();
    });
    byId<HTMLButtonElement>(this.doc, "qf-clear").addEventListener("click", () => {
      this.clearFilters();
    });
    this.qfActive.addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      const raw = target.getAttribute("data-remove-filter");
      if (raw !== null) {
        this.removeFilter(Number(raw));
      }
    });
  }
}

export function initApp(doc: Document, client: AppApi, urlState: UrlState): App {
  return new App(doc, client, urlState);
}
