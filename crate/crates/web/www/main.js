import init, { harmonic_svg, harmonic_energy, KuramotoSim } from "../pkg/fractal_kuramoto_web.js";

const $ = (id) => document.getElementById(id);

function drawHarmonic() {
  const level = Number($("h-level").value);
  const [a, b, c] = ["h-a", "h-b", "h-c"].map((id) => Number($(id).value));
  $("h-level-out").textContent = level;
  $("h-view").innerHTML = harmonic_svg(level, a, b, c);
  $("h-energy").textContent = harmonic_energy(level, a, b, c).toPrecision(12);
}

let sim = null;
let running = false;
let residual = NaN;

function showSim() {
  $("k-view").innerHTML = sim.svg();
  $("k-time").textContent = sim.time().toFixed(3);
  $("k-energy").textContent = sim.energy().toPrecision(10);
  $("k-res").textContent = Number.isNaN(residual) ? "-" : residual.toExponential(2);
  $("k-deg").textContent = sim.degree();
}

function buildSim() {
  running = false;
  $("k-error").textContent = "";
  try {
    if (sim) sim.free();
    sim = new KuramotoSim($("k-degree").value, Number($("k-level").value), Number($("k-noise").value), BigInt(1));
    residual = NaN;
    showSim();
  } catch (e) {
    sim = null;
    $("k-error").textContent = String(e.message || e);
  }
}

function tick() {
  if (!running || !sim) return;
  residual = sim.advance(200);
  showSim();
  if (residual < 1e-10) {
    running = false;
    return;
  }
  requestAnimationFrame(tick);
}

await init();
for (const id of ["h-level", "h-a", "h-b", "h-c"]) $(id).addEventListener("input", drawHarmonic);
$("k-build").addEventListener("click", buildSim);
$("k-run").addEventListener("click", () => {
  if (!sim) buildSim();
  if (sim && !running) {
    running = true;
    requestAnimationFrame(tick);
  }
});
$("k-stop").addEventListener("click", () => { running = false; });
drawHarmonic();
buildSim();
