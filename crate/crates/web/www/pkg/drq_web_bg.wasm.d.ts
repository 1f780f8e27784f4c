/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_battle_free: (a: number, b: number) => void;
export const assemble: (a: number, b: number) => [number, number];
export const battle_advance: (a: number, b: number) => number;
export const battle_coreSize: (a: number) => number;
export const battle_glyphs: (a: number) => [number, number];
export const battle_isFinished: (a: number) => number;
export const battle_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const battle_pixels: (a: number) => [number, number];
export const battle_status: (a: number) => [number, number];
export const classicSource: (a: number, b: number) => [number, number, number, number];
export const classics: () => [number, number];
export const evolve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
