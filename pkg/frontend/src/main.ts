// App wiring: session setup, decal management, click-to-place stamps,
// undo, and texture refresh on service events.

import { PaintApi } from "./api.js";
import { parseObj } from "./objparse.js";
import {
  BrushParams,
  buildStampRequest,
  intersectMesh,
  makePreview,
  MeshData,
  PlacementPreview,
} from "./picking.js";
import { Viewer } from "./viewer.js";

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

const api = new PaintApi("");
const viewer = new Viewer($<HTMLCanvasElement>("viewport"));

let sessionId: string | null = null;
let meshData: MeshData | null = null;
let decalId: string | null = null;
let preview: PlacementPreview | null = null;
let displayedVersion = -1;
let socket: WebSocket | null = null;

const brush: BrushParams = {
  scaleX: 0.25,
  scaleY: 0.25,
  depth: 0.25,
  rotation: 0,
  blendMode: "alpha_over",
  filter: "bilinear",
  cullCosine: 0,
  alphaThreshold: 0,
};

// one in-flight mutation at a time; clicks queue FIFO
let chain: Promise<unknown> = Promise.resolve();
const enqueue = (task: () => Promise<unknown>) => {
  chain = chain.then(task, task);
  return chain;
};

function toast(message: string, isError = false) {
  const el = $("status");
  el.textContent = message;
  el.className = isError ? "error" : "";
  if (isError) console.error(message);
}

async function refreshTexture() {
  if (!sessionId) return;
  const { version, bytes } = await api.fetchTexture(sessionId);
  if (version >= displayedVersion) {
    displayedVersion = version;
    await viewer.setTexturePng(bytes);
    $("version").textContent = `v${version}`;
  }
}

async function openSession(meshBytes: BlobPart, texturePng: BlobPart, mapSize: number) {
  const info = await api.createSession(meshBytes, texturePng, mapSize);
  sessionId = info.id;
  displayedVersion = -1;
  toast(`session ${info.id}: ${info.triangle_count} triangles at ${info.map_size}`);
  meshData = parseObj(await api.fetchMeshObj(info.id));
  viewer.setMesh(meshData);
  await refreshTexture();
  socket?.close();
  socket = api.openEvents(info.id, () => void refreshTexture().catch(console.error));
}

function currentScale(): [number, number, number] {
  return [brush.scaleX, brush.scaleY, brush.depth];
}

function placeAt(clientX: number, clientY: number) {
  if (!meshData) return;
  const ray = viewer.rayThrough(clientX, clientY);
  const hit = intersectMesh(ray.origin, ray.direction, meshData);
  preview = hit ? makePreview(hit, brush.depth) : null;
  viewer.showPreview(preview, currentScale());
}

function applyCurrentStamp() {
  const placed = preview;
  if (!sessionId || !placed || !decalId) {
    toast("place a preview and select a decal first", true);
    return;
  }
  const request = buildStampRequest(placed, brush, decalId);
  enqueue(async () => {
    try {
      const result = await api.postStamp(sessionId!, request);
      toast(`painted ${result.stats.painted} texels (v${result.version})`);
      await refreshTexture();
    } catch (err) {
      toast(String(err), true);
    }
  });
}

function makeQuadObj(): string {
  return [
    "v 0 0 0", "v 1 0 0", "v 1 1 0", "v 0 1 0",
    "vt 0 0", "vt 1 0", "vt 1 1", "vt 0 1",
    "vn 0 0 1",
    "f 1/1/1 2/2/1 3/3/1 4/4/1",
  ].join("\n");
}

function solidPng(size: number, rgba: [number, number, number, number]): Promise<Blob> {
  const canvas = document.createElement("canvas");
  canvas.width = canvas.height = size;
  const ctx = canvas.getContext("2d")!;
  ctx.fillStyle = `rgba(${rgba[0]},${rgba[1]},${rgba[2]},${rgba[3] / 255})`;
  ctx.fillRect(0, 0, size, size);
  return new Promise((resolve) => canvas.toBlob((b) => resolve(b!), "image/png"));
}

function bindUi() {
  $("create").onclick = async () => {
    const meshFile = $<HTMLInputElement>("mesh-file").files?.[0];
    const texFile = $<HTMLInputElement>("texture-file").files?.[0];
    const mapSize = Number($<HTMLInputElement>("map-size").value) || 256;
    try {
      if (meshFile && texFile) {
        await openSession(await meshFile.arrayBuffer(), await texFile.arrayBuffer(), mapSize);
      } else {
        await openSession(makeQuadObj(), await solidPng(mapSize, [235, 235, 225, 255]), mapSize);
        toast("demo quad session ready; upload a decal and click the surface");
      }
    } catch (err) {
      toast(String(err), true);
    }
  };

  $<HTMLInputElement>("decal-file").onchange = async (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (!file || !sessionId) return;
    try {
      decalId = await api.uploadDecal(sessionId, await file.arrayBuffer());
      toast(`decal ${decalId} ready`);
    } catch (err) {
      toast(String(err), true);
    }
  };

  $("undo").onclick = () => {
    if (!sessionId) return;
    enqueue(async () => {
      try {
        await api.undo(sessionId!);
        await refreshTexture();
      } catch (err) {
        toast(String(err), true);
      }
    });
  };

  const canvas = $<HTMLCanvasElement>("viewport");
  canvas.addEventListener("pointerdown", (e) => {
    if (e.button !== 0 || e.shiftKey) return; // left click places; shift orbits
    placeAt(e.clientX, e.clientY);
  });
  canvas.addEventListener("dblclick", () => applyCurrentStamp());
  $("apply").onclick = () => applyCurrentStamp();

  canvas.addEventListener(
    "wheel",
    (e) => {
      if (!e.ctrlKey) return;
      const factor = Math.exp(-e.deltaY * 0.001);
      brush.scaleX *= factor;
      brush.scaleY *= factor;
      viewer.showPreview(preview, currentScale());
      e.preventDefault();
    },
    { passive: false },
  );

  const bindNumber = (id: string, apply: (v: number) => void) => {
    $<HTMLInputElement>(id).onchange = (e) => {
      apply(Number((e.target as HTMLInputElement).value));
      if (preview) {
        // re-derive the projector so depth offsets stay consistent
        preview = makePreview({ ...preview, distance: 0, triangle: 0 }, brush.depth);
        viewer.showPreview(preview, currentScale());
      }
    };
  };
  bindNumber("brush-size", (v) => {
    brush.scaleX = v;
    brush.scaleY = v;
  });
  bindNumber("brush-depth", (v) => (brush.depth = v));
  bindNumber("brush-rotation", (v) => (brush.rotation = (v * Math.PI) / 180));
  $<HTMLSelectElement>("blend-mode").onchange = (e) =>
    (brush.blendMode = (e.target as HTMLSelectElement).value as BrushParams["blendMode"]);
  $<HTMLSelectElement>("filter").onchange = (e) =>
    (brush.filter = (e.target as HTMLSelectElement).value as BrushParams["filter"]);
}

bindUi();
toast("create a session to start painting");
