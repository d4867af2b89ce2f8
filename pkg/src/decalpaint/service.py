"""HTTP + WebSocket painting sessions.

One session owns a mesh, its baked maps, and the texture being painted.
Mutations (stamps, undo) are serialized per session through an asyncio
lock, snapshots feed a bounded undo stack, and every applied change
broadcasts a {"type": "texture-updated", "version": N} event to the
session's WebSocket listeners. Clients always fetch pixel data via GET;
the socket carries versions only.
"""

from __future__ import annotations

import asyncio
import itertools
import secrets
from collections import deque
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, Response, UploadFile, WebSocket
from fastapi.websockets import WebSocketDisconnect
from pydantic import BaseModel, Field

from . import imageio, localmaps, mesh as meshmod, projection

HISTORY_DEPTH = 32


class StampRequest(BaseModel):
    position: list[float] = Field(min_length=3, max_length=3)
    orientation: list[float] = Field(min_length=4, max_length=4)  # quaternion x,y,z,w
    scale: list[float] = Field(min_length=3, max_length=3)
    decal_id: str
    blend_mode: projection.BlendMode = projection.BlendMode.COPY
    filter: projection.Filter = projection.Filter.NEAREST
    cull_cosine: float = 0.0
    alpha_threshold: float = 0.0


@dataclass
class Session:
    id: str
    mesh: meshmod.Mesh
    maps: localmaps.LocalSpaceMaps
    texture: imageio.Texture
    version: int = 0
    history: deque = dc_field(default_factory=lambda: deque(maxlen=HISTORY_DEPTH))
    decals: dict[str, imageio.Texture] = dc_field(default_factory=dict)
    decal_counter: "itertools.count" = dc_field(default_factory=lambda: itertools.count(1))
    lock: asyncio.Lock = dc_field(default_factory=asyncio.Lock)
    listeners: list[WebSocket] = dc_field(default_factory=list)


def create_app(
    cache: Optional[localmaps.MapsCache] = None,
    dilate_radius: int = 2,
    static_dir: Optional[str] = None,
) -> FastAPI:
    """Build the painting service. `dilate_radius` pads UV seams on every
    baked map; pass 0 for raw coverage."""
    app = FastAPI(title="decalpaint")
    app.state.cache = cache if cache is not None else localmaps.MapsCache()
    app.state.sessions = {}
    app.state.dilate_radius = dilate_radius

    def get_session(session_id: str) -> Session:
        session = app.state.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    async def broadcast(session: Session) -> None:
        event = {"type": "texture-updated", "version": session.version}
        dead = []
        for ws in session.listeners:
            try:
                await ws.send_json(event)
            except Exception:
                dead.append(ws)
        for ws in dead:
            session.listeners.remove(ws)

    @app.post("/sessions")
    async def create_session(
        mesh: UploadFile = File(...),
        texture: UploadFile = File(...),
        map_size: int = Form(...),
    ):
        if map_size < 1:
            raise HTTPException(status_code=400, detail="map_size must be >= 1")
        mesh_bytes = await mesh.read()
        texture_bytes = await texture.read()
        try:
            parsed = meshmod.parse_obj(mesh_bytes)
        except meshmod.MeshError as exc:
            raise HTTPException(status_code=400, detail=f"mesh: {exc}")
        try:
            target = imageio.load_png(texture_bytes)
        except imageio.DecodeError as exc:
            raise HTTPException(status_code=400, detail=f"texture: {exc}")
        if (target.width, target.height) != (map_size, map_size):
            raise HTTPException(
                status_code=400,
                detail={
                    "error": "DimensionMismatch",
                    "message": f"texture is {target.width}x{target.height}, "
                    f"map_size is {map_size}",
                },
            )
        report = meshmod.validate_mesh(parsed, map_size, map_size)
        if not report.ok:
            raise HTTPException(
                status_code=400,
                detail={"error": "ValidationFailed", "report": report.to_dict()},
            )
        maps = app.state.cache.get_or_generate(parsed, map_size, map_size)
        if app.state.dilate_radius > 0:
            maps = localmaps.dilate_maps(maps, app.state.dilate_radius)
        session = Session(
            id=secrets.token_hex(8), mesh=parsed, maps=maps, texture=target
        )
        app.state.sessions[session.id] = session
        return {
            "id": session.id,
            "version": session.version,
            "triangle_count": parsed.triangle_count,
            "map_size": map_size,
        }

    @app.post("/sessions/{session_id}/decals")
    async def upload_decal(session_id: str, decal: UploadFile = File(...)):
        session = get_session(session_id)
        data = await decal.read()
        try:
            image = imageio.load_png(data)
        except imageio.DecodeError as exc:
            raise HTTPException(status_code=400, detail=f"decal: {exc}")
        decal_id = f"decal-{next(session.decal_counter)}"
        session.decals[decal_id] = image
        return {"decal_id": decal_id, "width": image.width, "height": image.height}

    @app.post("/sessions/{session_id}/stamps")
    async def post_stamp(session_id: str, request: StampRequest):
        session = get_session(session_id)
        decal = session.decals.get(request.decal_id)
        if decal is None:
            raise HTTPException(status_code=404, detail=f"unknown decal {request.decal_id!r}")
        try:
            projector = projection.DecalProjector(
                position=request.position,
                orientation=request.orientation,
                scale=request.scale,
                decal=decal,
            )
            options = projection.StampOptions(
                blend_mode=request.blend_mode,
                filter=request.filter,
                cull_cosine=request.cull_cosine,
                alpha_threshold=request.alpha_threshold,
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        async with session.lock:
            session.history.append(session.texture.pixels.copy())
            stats = projection.apply_stamp(session.texture, session.maps, projector, options)
            session.version += 1
            await broadcast(session)
            return {"version": session.version, "stats": stats.to_dict()}

    @app.post("/sessions/{session_id}/undo")
    async def undo(session_id: str):
        session = get_session(session_id)
        async with session.lock:
            if session.history:
                session.texture.pixels[:] = session.history.pop()
                session.version += 1
                await broadcast(session)
            return {"version": session.version}

    @app.get("/sessions/{session_id}/texture")
    async def get_texture(session_id: str):
        session = get_session(session_id)
        async with session.lock:
            version = session.version
            png = imageio.save_png(session.texture)
        return Response(
            content=png, media_type="image/png", headers={"X-Texture-Version": str(version)}
        )

    @app.get("/sessions/{session_id}/maps")
    async def get_maps(session_id: str):
        session = get_session(session_id)
        return Response(
            content=localmaps.encode_lsmap(session.maps),
            media_type="application/octet-stream",
        )

    @app.get("/sessions/{session_id}/mesh")
    async def get_mesh(session_id: str):
        session = get_session(session_id)
        return Response(content=meshmod.serialize_obj(session.mesh), media_type="text/plain")

    @app.websocket("/sessions/{session_id}/events")
    async def events(websocket: WebSocket, session_id: str):
        session = app.state.sessions.get(session_id)
        if session is None:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        session.listeners.append(websocket)
        try:
            while True:
                await websocket.receive_text()  # clients only listen; drain pings
        except WebSocketDisconnect:
            pass
        finally:
            if websocket in session.listeners:
                session.listeners.remove(websocket)

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
