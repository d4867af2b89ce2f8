// Minimal OBJ reader for meshes echoed by the service (v/vt/vn records,
// faces with p/t/n corners, fan triangulation). Produces flat per-corner
// arrays ready for rendering and picking.

import type { MeshData } from "./picking.js";

export function parseObj(text: string): MeshData {
  const positions: number[][] = [];
  const uvs: number[][] = [];
  const normals: number[][] = [];
  const outPos: number[] = [];
  const outUv: number[] = [];
  const outNrm: number[] = [];

  const pushCorner = (token: string, lineNo: number) => {
    const parts = token.split("/");
    if (parts.length !== 3 || !parts[1] || !parts[2]) {
      throw new Error(`line ${lineNo}: face corner ${token} must be p/t/n`);
    }
    const pi = parseInt(parts[0], 10) - 1;
    const ti = parseInt(parts[1], 10) - 1;
    const ni = parseInt(parts[2], 10) - 1;
    const p = positions[pi];
    const t = uvs[ti];
    const n = normals[ni];
    if (!p || !t || !n) throw new Error(`line ${lineNo}: face index out of range`);
    outPos.push(p[0], p[1], p[2]);
    outUv.push(t[0], t[1]);
    outNrm.push(n[0], n[1], n[2]);
  };

  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line || line.startsWith("#")) continue;
    const parts = line.split(/\s+/);
    switch (parts[0]) {
      case "v":
        positions.push(parts.slice(1, 4).map(Number));
        break;
      case "vt":
        uvs.push(parts.slice(1, 3).map(Number));
        break;
      case "vn":
        normals.push(parts.slice(1, 4).map(Number));
        break;
      case "f": {
        const corners = parts.slice(1);
        if (corners.length < 3) throw new Error(`line ${i + 1}: face needs 3+ corners`);
        for (let k = 1; k < corners.length - 1; k++) {
          pushCorner(corners[0], i + 1);
          pushCorner(corners[k], i + 1);
          pushCorner(corners[k + 1], i + 1);
        }
        break;
      }
      default:
        break; // other keywords carry nothing we render
    }
  }
  if (outPos.length === 0) throw new Error("OBJ contains no faces");
  return {
    positions: new Float32Array(outPos),
    normals: new Float32Array(outNrm),
    uvs: new Float32Array(outUv),
    triangleCount: outPos.length / 9,
  };
}
