// Typed client for the painting service. The UI never mutates pixels
// locally: every texture byte it shows came back from fetchTexture.

import type { StampRequest } from "./picking.js";

export interface SessionInfo {
  id: string;
  version: number;
  triangle_count: number;
  map_size: number;
}

export interface StampStats {
  painted: number;
  culled_backface: number;
  out_of_bounds: number;
  uncovered: number;
  transparent_skipped: number;
}

export interface StampResult {
  version: number;
  stats: StampStats;
}

async function expectOk(resp: Response): Promise<Response> {
  if (!resp.ok) {
    let detail = `${resp.status}`;
    try {
      const body = await resp.json();
      detail = `${resp.status}: ${JSON.stringify(body.detail ?? body)}`;
    } catch {
      /* non-JSON error body */
    }
    throw new Error(`request failed (${detail})`);
  }
  return resp;
}

export class PaintApi {
  constructor(readonly base: string) {}

  async createSession(
    meshObj: BlobPart,
    texturePng: BlobPart,
    mapSize: number,
  ): Promise<SessionInfo> {
    const form = new FormData();
    form.append("mesh", new Blob([meshObj]), "mesh.obj");
    form.append("texture", new Blob([texturePng], { type: "image/png" }), "texture.png");
    form.append("map_size", String(mapSize));
    const resp = await expectOk(await fetch(`${this.base}/sessions`, { method: "POST", body: form }));
    return resp.json();
  }

  async uploadDecal(sessionId: string, png: BlobPart): Promise<string> {
    const form = new FormData();
    form.append("decal", new Blob([png], { type: "image/png" }), "decal.png");
    const resp = await expectOk(
      await fetch(`${this.base}/sessions/${sessionId}/decals`, { method: "POST", body: form }),
    );
    return (await resp.json()).decal_id;
  }

  async postStamp(sessionId: string, request: StampRequest): Promise<StampResult> {
    const resp = await expectOk(
      await fetch(`${this.base}/sessions/${sessionId}/stamps`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(request),
      }),
    );
    return resp.json();
  }

  async undo(sessionId: string): Promise<number> {
    const resp = await expectOk(
      await fetch(`${this.base}/sessions/${sessionId}/undo`, { method: "POST" }),
    );
    return (await resp.json()).version;
  }

  async fetchTexture(sessionId: string): Promise<{ version: number; bytes: Uint8Array }> {
    const resp = await expectOk(await fetch(`${this.base}/sessions/${sessionId}/texture`));
    const version = Number(resp.headers.get("X-Texture-Version") ?? "-1");
    const bytes = new Uint8Array(await resp.arrayBuffer());
    return { version, bytes };
  }

  async fetchMeshObj(sessionId: string): Promise<string> {
    const resp = await expectOk(await fetch(`${this.base}/sessions/${sessionId}/mesh`));
    return resp.text();
  }

  /** Subscribe to texture-updated events; returns the socket so callers
   * can close it. Browser only (node 20 lacks WebSocket). */
  openEvents(sessionId: string, onVersion: (version: number) => void): WebSocket {
    const wsBase = this.base.replace(/^http/, "ws");
    const socket = new WebSocket(`${wsBase}/sessions/${sessionId}/events`);
    socket.onmessage = (event) => {
      try {
        const data = JSON.parse(event.data as string);
        if (data.type === "texture-updated") onVersion(data.version);
      } catch {
        /* ignore malformed events */
      }
    };
    return socket;
  }
}
