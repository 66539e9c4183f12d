"""HTTP/WebSocket control endpoint for a live engine.

Routes:
    POST /params        JSON subset of the tunable fields -> 200 applied / 422
    GET  /metrics       newline-delimited MetricsRecord JSON, streamed live
    GET  /ws            WebSocket: same records out, update JSON in
    GET  /frame/latest  most recent received frame as binary PGM
    GET  /config        full effective scenario config

The engine runs on its own thread and owns all simulation state; this
module only exchanges ParamUpdates and read-only record snapshots with it.
CORS is wide open so a dashboard served from anywhere (including file://)
can talk to a local engine.
"""

import asyncio
import json
import threading

from aiohttp import WSMsgType, web

from .runtime import LinkEngine, ParamUpdate

_SENTINEL = object()


class ControlServer:
    def __init__(self, engine: LinkEngine, ui_dir=None):
        self.engine = engine
        self.ui_dir = ui_dir
        self.history: list[dict] = []
        self.bound: tuple[str, int] | None = None
        self._subscribers: set[asyncio.Queue] = set()
        self._loop: asyncio.AbstractEventLoop | None = None
        self._stop: asyncio.Event | None = None
        engine.on_record = self._on_record

    # -- engine thread side ------------------------------------------------

    def _on_record(self, record):
        data = record.to_json_dict()
        self.history.append(data)
        self._post(data)

    def _engine_finished(self):
        self._post(_SENTINEL)

    def _post(self, item):
        if self._loop is None:
            return
        try:
            self._loop.call_soon_threadsafe(self._broadcast, item)
        except RuntimeError:
            pass  # loop already closed during shutdown

    def _broadcast(self, item):
        for queue in list(self._subscribers):
            queue.put_nowait(item)

    # -- handlers ------------------------------------------------------------

    async def post_params(self, request: web.Request) -> web.Response:
        try:
            data = await request.json()
        except (json.JSONDecodeError, UnicodeDecodeError):
            return web.json_response({"error": "malformed JSON"}, status=400)
        try:
            update = ParamUpdate.from_json_dict(data)
            applied = self.engine.queue_update(update)
        except ValueError as exc:
            return web.json_response({"error": str(exc)}, status=422)
        return web.json_response({"applied": applied})

    async def get_metrics(self, request: web.Request) -> web.StreamResponse:
        response = web.StreamResponse(headers={"Content-Type": "application/x-ndjson"})
        await response.prepare(request)
        queue: asyncio.Queue = asyncio.Queue()
        self._subscribers.add(queue)
        try:
            for item in list(self.history):
                await response.write(_line(item))
            if not self.engine.finished:
                while True:
                    item = await queue.get()
                    if item is _SENTINEL:
                        break
                    await response.write(_line(item))
        except (ConnectionResetError, asyncio.CancelledError):
            pass
        finally:
            self._subscribers.discard(queue)
        return response

    async def websocket(self, request: web.Request) -> web.WebSocketResponse:
        ws = web.WebSocketResponse()
        await ws.prepare(request)
        queue: asyncio.Queue = asyncio.Queue()
        self._subscribers.add(queue)
        for item in list(self.history):
            await ws.send_json(item)

        async def pump():
            while True:
                item = await queue.get()
                if item is _SENTINEL:
                    break
                await ws.send_json(item)

        pump_task = asyncio.ensure_future(pump())
        try:
            async for msg in ws:
                if msg.type != WSMsgType.TEXT:
                    continue
                try:
                    update = ParamUpdate.from_json_dict(json.loads(msg.data))
                    applied = self.engine.queue_update(update)
                    await ws.send_json({"ok": True, "applied": applied})
                except (json.JSONDecodeError, ValueError) as exc:
                    await ws.send_json({"ok": False, "error": str(exc)})
        finally:
            pump_task.cancel()
            self._subscribers.discard(queue)
        return ws

    async def get_frame(self, request: web.Request) -> web.Response:
        frame = self.engine.latest_frame_pgm
        if frame is None:
            return web.Response(status=404, text="no frame received yet")
        return web.Response(body=frame, content_type="image/x-portable-graymap")

    async def get_config(self, request: web.Request) -> web.Response:
        return web.json_response(self.engine.effective_config_dict())

    # -- lifecycle -------------------------------------------------------------

    def build_app(self) -> web.Application:
        app = web.Application(middlewares=[_cors_middleware])
        app.router.add_post("/params", self.post_params)
        app.router.add_get("/metrics", self.get_metrics)
        app.router.add_get("/ws", self.websocket)
        app.router.add_get("/frame/latest", self.get_frame)
        app.router.add_get("/config", self.get_config)
        app.router.add_route("OPTIONS", "/{tail:.*}", _preflight)
        if self.ui_dir:
            app.router.add_get("/ui", _ui_redirect)
            app.router.add_static("/ui/", self.ui_dir)
        return app

    async def run_async(self, host: str, port: int, on_ready=None, banner: bool = True):
        """Bind, start the engine thread, and serve until request_stop()."""
        self._loop = asyncio.get_running_loop()
        self._stop = asyncio.Event()
        runner = web.AppRunner(self.build_app(), access_log=None)
        await runner.setup()
        site = web.TCPSite(runner, host, port)
        await site.start()
        self.bound = tuple(runner.addresses[0][:2])
        if banner:
            print(f"serving control endpoint on http://{self.bound[0]}:{self.bound[1]}", flush=True)
        if on_ready is not None:
            on_ready(self.bound)

        worker = threading.Thread(target=self._run_engine, name="fsolink-engine", daemon=True)
        worker.start()
        try:
            await self._stop.wait()
        finally:
            await runner.cleanup()

    def _run_engine(self):
        try:
            self.engine.run(pace=True)
        finally:
            self._engine_finished()

    def request_stop(self):
        if self._loop is not None and self._stop is not None:
            self._loop.call_soon_threadsafe(self._stop.set)


def serve_control(engine: LinkEngine, host: str, port: int, ui_dir=None) -> int:
    """Blocking entry point: serve the engine's control endpoint until ^C."""
    server = ControlServer(engine, ui_dir=ui_dir)
    try:
        asyncio.run(server.run_async(host, port))
    except KeyboardInterrupt:
        pass
    return 0


class ServerHandle:
    """A control server running on a background thread (used by tests)."""

    def __init__(self, server: ControlServer, thread: threading.Thread, url: str):
        self.server = server
        self.thread = thread
        self.url = url

    def stop(self):
        self.server.request_stop()
        self.thread.join(timeout=10)


def start_server_thread(
    engine: LinkEngine, host: str = "127.0.0.1", port: int = 0, ui_dir=None
) -> ServerHandle:
    server = ControlServer(engine, ui_dir=ui_dir)
    ready = threading.Event()

    def runner():
        asyncio.run(server.run_async(host, port, on_ready=lambda _b: ready.set(), banner=False))

    thread = threading.Thread(target=runner, name="fsolink-control", daemon=True)
    thread.start()
    if not ready.wait(timeout=10):
        raise RuntimeError("control server failed to start")
    bound_host, bound_port = server.bound
    return ServerHandle(server, thread, f"http://{bound_host}:{bound_port}")


def _line(item: dict) -> bytes:
    return (json.dumps(item, separators=(",", ":")) + "\n").encode()


async def _ui_redirect(request: web.Request) -> web.Response:
    raise web.HTTPFound("/ui/index.html")


async def _preflight(request: web.Request) -> web.Response:
    return web.Response(status=204)


@web.middleware
async def _cors_middleware(request: web.Request, handler):
    try:
        response = await handler(request)
    except web.HTTPException as exc:
        exc.headers["Access-Control-Allow-Origin"] = "*"
        raise
    response.headers["Access-Control-Allow-Origin"] = "*"
    response.headers["Access-Control-Allow-Methods"] = "GET, POST, OPTIONS"
    response.headers["Access-Control-Allow-Headers"] = "Content-Type"
    return response
