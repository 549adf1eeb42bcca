import init, { torus_spectrum, classify, list_catalog, sphere_instability } from "./pkg/folstab_web.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => (x === null || x === undefined ? "-" : Number(x).toPrecision(8));

function show(target, fn) {
  target.classList.remove("err");
  target.textContent = "computing...";
  setTimeout(() => {
    const t0 = performance.now();
    try {
      target.innerHTML = fn();
      target.insertAdjacentHTML("beforeend", `<div>${((performance.now() - t0) / 1000).toFixed(2)} s</div>`);
    } catch (e) {
      target.classList.add("err");
      target.textContent = String(e);
    }
  }, 10);
}

function table(head, rows) {
  const th = head.map((h) => `<th>${h}</th>`).join("");
  const tr = rows.map((r) => `<tr>${r.map((c) => `<td>${c}</td>`).join("")}</tr>`).join("");
  return `<table><tr>${th}</tr>${tr}</table>`;
}

await init();

for (const name of JSON.parse(list_catalog())) {
  const o = document.createElement("option");
  o.value = o.textContent = name;
  $("cname").appendChild(o);
}

$("trun").onclick = () =>
  show($("tout"), () => {
    const r = JSON.parse(torus_spectrum(+$("tx").value, +$("ty").value, +$("tres").value, +$("tcount").value));
    const rows = r.eigenvalues.map((l, i) => [i, fmt(l), fmt(r.fourier[i])]);
    return `index ${r.index}` + table(["k", "discrete", "Fourier"], rows);
  });

$("crun").onclick = () =>
  show($("cout"), () => {
    const r = JSON.parse(classify($("cname").value));
    return table(
      ["dim", "λ₁", "s", "λ₁ < 2s/n", "unstable", "clause"],
      [[r.dim, fmt(r.lambda1), fmt(r.scalar), r.condition_lambda1 ?? "-", r.unstable, r.clause ?? "-"]],
    ) + `<div>${r.reason}</div>`;
  });

$("srun").onclick = () =>
  show($("sout"), () => {
    const r = JSON.parse(sphere_instability(+$("sres").value));
    const v = r.v.map((x) => x.toFixed(4)).join(", ");
    const spheres = r.spheres.map((s) => [`S^${s.n}`, fmt(s.max_eigenvalue), s.unstable]);
    return (
      table(["", "value"], [
        ["Tr Q direct", fmt(r.trace_direct)],
        ["Tr Q Gauss formula", fmt(r.trace_gauss)],
        ["−4π²", fmt(r.trace_exact)],
        ["Q(v)", fmt(r.qf_value)],
      ]) +
      `<div>v = (${v})</div>` +
      table(["sphere", "max eigenvalue", "unstable"], spheres)
    );
  });
