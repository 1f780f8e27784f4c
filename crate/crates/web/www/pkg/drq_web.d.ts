/* tslint:disable */
/* eslint-disable */

/**
 * A battle between the user's program and one opponent, advanced by the page.
 */
export class Battle {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Runs up to `cycles` timesteps; true once the battle is over.
     */
    advance(cycles: number): boolean;
    /**
     * Opcode glyphs of the whole core, for hover text.
     */
    glyphs(): string;
    isFinished(): boolean;
    constructor(text: string, opponent: string, seed: number);
    /**
     * RGBA pixels, one per cell, colored by the last writer.
     */
    pixels(): Uint8Array;
    /**
     * Cycle, per-warrior state and, when finished, the fitness split.
     */
    status(): string;
    readonly coreSize: number;
}

/**
 * Assembles `text` and returns `{ok, name, length, digest, canonical}` or
 * `{ok: false, line, error}` as JSON.
 */
export function assemble(text: string): string;

export function classicSource(name: string): string;

/**
 * Names of the bundled opponents, as a JSON array.
 */
export function classics(): string;

/**
 * Random-mutation MAP-Elites against the named opponents (JSON array).
 * Returns the fitness grid, rows by thread bin, and the best program.
 */
export function evolve(opponents_json: string, iterations: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_battle_free: (a: number, b: number) => void;
    readonly assemble: (a: number, b: number) => [number, number];
    readonly battle_advance: (a: number, b: number) => number;
    readonly battle_coreSize: (a: number) => number;
    readonly battle_glyphs: (a: number) => [number, number];
    readonly battle_isFinished: (a: number) => number;
    readonly battle_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly battle_pixels: (a: number) => [number, number];
    readonly battle_status: (a: number) => [number, number];
    readonly classicSource: (a: number, b: number) => [number, number, number, number];
    readonly classics: () => [number, number];
    readonly evolve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
