// Built with `wasm-pack build --target web --out-dir www/pkg` from crates/wasm.
import init, { select_demo, mse_curve_svg, lemma_demo } from "./pkg/tmsel_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const fmt = (x) => x.toPrecision(5);

function guard(out, f) {
  try {
    f();
  } catch (e) {
    $(out).innerHTML = `<p class="err">${e}</p>`;
  }
}

function showSelect() {
  const r = JSON.parse(select_demo($("sel-scenario").value, num("sel-s"), num("sel-seed"), num("sel-boot")));
  const rows = r.rows
    .map((x) => `<tr class="${x.selected ? "sel" : ""}"><td>${x.label}</td><td>${fmt(x.estimate)}</td><td>${fmt(x.mod_risk)}</td></tr>`)
    .join("");
  $("sel-out").innerHTML =
    `<p>true effect ${fmt(r.truth)}; selected ${r.selected}, estimate ${fmt(r.estimate)}, ` +
    `95% interval [${fmt(r.lower)}, ${fmt(r.upper)}]</p>` +
    `<table><tr><th>candidate</th><th>estimate</th><th>risk</th></tr>${rows}</table>`;
}

function showMse() {
  $("mse-out").innerHTML = mse_curve_svg($("mse-scenario").value, num("mse-runs"), num("mse-seed"));
}

function showLemma() {
  const r = JSON.parse(lemma_demo(num("lem-k"), num("lem-corr"), num("lem-runs"), 7));
  $("lem-out").innerHTML = `<p>pooled form ${fmt(r.left)}, leave-one-out form ${fmt(r.right)}, z = ${r.z.toFixed(2)}</p>`;
}

await init();
$("sel-run").onclick = () => guard("sel-out", showSelect);
$("mse-run").onclick = () => guard("mse-out", showMse);
$("lem-run").onclick = () => guard("lem-out", showLemma);
guard("sel-out", showSelect);
