import init, { assemble, classics, classicSource, Battle, evolve } from "./pkg/drq_web.js";

const $ = (id) => document.getElementById(id);

function showAssembly() {
  const out = JSON.parse(assemble($("source").value));
  const listing = $("listing");
  if (out.ok) {
    listing.className = "";
    listing.textContent = `${out.name}: ${out.length} instructions, digest ${out.digest.slice(0, 16)}\n\n${out.canonical}`;
  } else {
    listing.className = "err";
    listing.textContent = `line ${out.line}: ${out.error}`;
  }
  return out.ok;
}

let battle = null;
let timer = null;

function drawCore() {
  const canvas = $("core");
  const ctx = canvas.getContext("2d");
  const pixels = new Uint8ClampedArray(battle.pixels());
  ctx.putImageData(new ImageData(pixels, canvas.width, canvas.height), 0, 0);
  const status = JSON.parse(battle.status());
  const lines = status.warriors.map((w) => {
    const fit = w.fitness == null ? "" : `  fitness ${w.fitness.toFixed(3)}`;
    return `${w.alive ? "alive" : "dead "}  ${w.name.padEnd(16)} processes ${String(w.processes).padStart(4)}  ` +
      `spawned ${String(w.spawned_threads).padStart(5)}  coverage ${String(w.memory_coverage).padStart(4)}${fit}`;
  });
  $("battle-status").textContent = `cycle ${status.cycle}${status.finished ? " (finished)" : ""}\n` + lines.join("\n");
  $("battle-status").style.color = "";
}

function stop() {
  if (timer !== null) cancelAnimationFrame(timer);
  timer = null;
}

function fight() {
  stop();
  if (!showAssembly()) return;
  try {
    battle = new Battle($("source").value, $("opponent").value, Number($("seed").value) || 0);
  } catch (e) {
    $("battle-status").textContent = String(e);
    return;
  }
  const tick = () => {
    const done = battle.advance(Number($("speed").value));
    drawCore();
    timer = done ? null : requestAnimationFrame(tick);
  };
  tick();
}

function heatColor(t) {
  // Dark blue through teal to yellow.
  const r = Math.round(255 * Math.min(1, Math.max(0, 2 * t - 0.6)));
  const g = Math.round(60 + 180 * t);
  const b = Math.round(140 * (1 - t) + 40);
  return [r, g, b];
}

function drawHeatmap(grid) {
  const rows = grid.length;
  const cols = rows ? grid[0].length : 0;
  const canvas = $("heatmap");
  canvas.width = cols;
  canvas.height = rows;
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(cols, rows);
  const max = Math.max(1e-9, ...grid.flat().filter((v) => v != null));
  grid.forEach((row, r) => row.forEach((v, c) => {
    // Thread bins grow upward.
    const i = ((rows - 1 - r) * cols + c) * 4;
    const [red, green, blue] = v == null ? [20, 20, 24] : heatColor(v / max);
    img.data.set([red, green, blue, 255], i);
  }));
  ctx.putImageData(img, 0, 0);
}

function runEvolve() {
  const picked = [...document.querySelectorAll("#opponents input:checked")].map((b) => b.value);
  const status = $("evolve-status");
  status.textContent = "running...";
  // Let the page repaint before the synchronous search starts.
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const out = JSON.parse(evolve(JSON.stringify(picked), Number($("iterations").value) || 1, 1));
      drawHeatmap(out.grid);
      const secs = ((performance.now() - t0) / 1000).toFixed(1);
      status.textContent =
        `${out.occupied} of ${out.grid.length * out.grid.length} cells filled\n` +
        `${out.evaluations} evaluations, ${out.invalid} invalid, ${secs} s\n` +
        `best fitness ${out.best_fitness == null ? "-" : out.best_fitness.toFixed(3)}\n\n` +
        "rows: spawned threads (log bins, upward)\ncolumns: memory coverage (log bins)";
      $("best").textContent = out.best_program ?? "";
    } catch (e) {
      status.textContent = String(e);
    }
  }, 20);
}

async function main() {
  await init();
  const names = JSON.parse(classics());
  for (const name of names) {
    $("preset").add(new Option(name, name));
    $("opponent").add(new Option(name, name));
    const label = document.createElement("label");
    label.className = "opp";
    label.innerHTML = `<input type="checkbox" value="${name}"${name === "imp" || name === "dwarf" ? " checked" : ""}> ${name}`;
    $("opponents").append(label);
  }
  $("preset").selectedIndex = -1;
  $("opponent").value = "dwarf";
  $("preset").addEventListener("change", (e) => {
    $("source").value = classicSource(e.target.value);
    showAssembly();
  });
  $("assemble").addEventListener("click", showAssembly);
  $("fight").addEventListener("click", fight);
  $("stop").addEventListener("click", stop);
  $("evolve").addEventListener("click", runEvolve);
  showAssembly();
}

main();
