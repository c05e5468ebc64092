import init, { normal_form, simple_module, steinberg } from "./pkg/qdist_demo.js";

const num = (id) => Number(document.getElementById(id).value);

function show(outId, compute) {
  const out = document.getElementById(outId);
  try {
    out.textContent = compute();
    out.className = "";
  } catch (e) {
    out.textContent = e.message ?? String(e);
    out.className = "error";
  }
}

await init();

document.getElementById("nf").onclick = () =>
  show("nf-out", () => normal_form(num("ell"), num("level"), document.getElementById("expr").value));
document.getElementById("simple").onclick = () =>
  show("simple-out", () => simple_module(num("ell"), num("level"), num("p-simple")));
document.getElementById("steinberg").onclick = () =>
  show("steinberg-out", () => steinberg(num("ell"), num("level"), num("p-steinberg")));
