"""Dialogue sessions: prompt dispatch, backends, and transactional editing.

A session holds the resolved request, the conversation history, and the
current layout. Each turn renders an instruction, sends it to a pluggable
completion backend, parses the delimiter-wrapped response against the
expected instance-name set, and only then advances state; failed turns
leave the layout untouched.

Edit instructions re-embed the current scene (dims block plus serialized
placements) so a turn stays self-contained even when older history is
dropped to fit the character budget.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol, Sequence

import httpx

from .catalog import (
    AssetCatalog,
    AssetRecord,
    DesignRequest,
    RequestItem,
    jaccard,
    retrieve_many,
    tokenize,
)
from .errors import (
    BackendError,
    EditFailed,
    GenerationFailed,
    ParseError,
    SessionPhaseError,
    UnknownTarget,
)
from .geometry import BBoxDims, RoomBounds, SceneLayout
from .parsing import (
    OutputBlockKind,
    apply_placements,
    extract_input_block,
    parse_output,
    placements_of,
    serialize_layout,
)
from .placer import PlacerConfig, place, place_incremental
from .prompts import (
    ADD_OBJECTS_CLOSE,
    ADD_OBJECTS_OPEN,
    DELETE_OBJECTS_CLOSE,
    DELETE_OBJECTS_OPEN,
    TASK_OBJECTS_CLOSE,
    TASK_OBJECTS_OPEN,
    TASK_ROOM_CLOSE,
    TASK_ROOM_OPEN,
    EditKind,
    EditRequest,
    PromptTemplates,
    default_templates,
    format_dims_json,
    render_add_prompt,
    render_generation_prompt,
    render_remove_prompt,
)

ENV_ENDPOINT = "LLPLACE_LLM_ENDPOINT"
ENV_MODEL = "LLPLACE_LLM_MODEL"
ENV_API_KEY = "LLPLACE_LLM_API_KEY"


class BackendKind(str, Enum):
    REMOTE = "remote"
    HEURISTIC = "heuristic"
    REPLAY = "replay"


@dataclass(frozen=True)
class BackendConfig:
    kind: BackendKind = BackendKind.HEURISTIC
    endpoint: str = ""
    model: str = ""
    api_key_env: str = ENV_API_KEY
    temperature: float = 0.0
    timeout: float = 30.0
    max_history_chars: int = 8000
    seed: int = 0
    replay_script: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind is BackendKind.REMOTE and not (self.endpoint and self.model):
            raise ValueError("remote backend requires endpoint and model")
        if self.kind is BackendKind.REPLAY and not self.replay_script:
            raise ValueError("replay backend requires a script of canned responses")


class CompletionBackend(Protocol):
    def complete(self, instruction: str, history: Sequence[tuple[str, str]]) -> str:
        """Return the model response for one instruction given prior turns."""


class ReplayBackend:
    """Pops scripted responses in order; exhausting the script is an error."""

    def __init__(self, script: Sequence[str]):
        self._script = list(script)
        self._cursor = 0

    def complete(self, instruction: str, history: Sequence[tuple[str, str]]) -> str:
        if self._cursor >= len(self._script):
            raise BackendError("replay script exhausted")
        response = self._script[self._cursor]
        self._cursor += 1
        return response


class RemoteBackend:
    """Chat-completions HTTP client; history becomes prior messages."""

    def __init__(self, config: BackendConfig, client: httpx.Client | None = None):
        self.config = config
        self._client = client

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env, "") if self.config.api_key_env else ""
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, instruction: str, history: Sequence[tuple[str, str]]) -> str:
        messages = [{"role": role, "content": text} for role, text in history]
        messages.append({"role": "user", "content": instruction})
        payload = {
            "model": self.config.model,
            "messages": messages,
            "temperature": self.config.temperature,
        }
        client = self._client or httpx.Client(timeout=self.config.timeout)
        try:
            response = client.post(self.config.endpoint, json=payload, headers=self._headers())
        except httpx.HTTPError as exc:
            raise BackendError(f"completion request failed: {exc}") from exc
        finally:
            if client is not self._client:
                client.close()
        if response.status_code // 100 != 2:
            raise BackendError(f"completion endpoint returned {response.status_code}")
        try:
            data = response.json()
            choice = data["choices"][0]
            content = choice["message"]["content"] if "message" in choice else choice["text"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise BackendError(f"unexpected completion payload: {exc!r}") from exc
        if not isinstance(content, str):
            raise BackendError("completion content is not text")
        return content


class HeuristicBackend:
    """Rule-based solver behind the backend contract.

    Reads the same instruction text a model would receive: the objects
    block for generation, the embedded scene plus [Add Objects] /
    [Delete Objects] blocks for edits. Survivor placements in edit turns
    are re-emitted verbatim; only new objects are solved.
    """

    def __init__(self, bounds: RoomBounds, placer_config: PlacerConfig | None = None):
        self.bounds = bounds
        self.placer_config = placer_config or PlacerConfig()

    def complete(self, instruction: str, history: Sequence[tuple[str, str]]) -> str:
        if ADD_OBJECTS_OPEN in instruction:
            return self._add_turn(instruction)
        if DELETE_OBJECTS_OPEN in instruction:
            return self._remove_turn(instruction)
        return self._generation_turn(instruction)

    @staticmethod
    def _dims_block(instruction: str) -> dict[str, BBoxDims]:
        inner = extract_input_block(instruction, TASK_OBJECTS_OPEN, TASK_OBJECTS_CLOSE)
        data = json.loads(inner)
        return {
            name: BBoxDims(float(v["h"]), float(v["w"]), float(v["d"]))
            for name, v in data.items()
        }

    @staticmethod
    def _scene_state(instruction: str) -> tuple[dict[str, BBoxDims], list]:
        dims = HeuristicBackend._dims_block(instruction)
        records = parse_output(instruction, OutputBlockKind.TASK_OUTPUT, set(dims))
        return dims, records

    def _generation_turn(self, instruction: str) -> str:
        dims = self._dims_block(instruction)
        try:
            room_type = extract_input_block(instruction, TASK_ROOM_OPEN, TASK_ROOM_CLOSE).strip()
        except ParseError:
            room_type = "room"
        layout = place(list(dims.items()), self.bounds, self.placer_config, room_type)
        return serialize_layout(placements_of(layout), OutputBlockKind.TASK_OUTPUT)

    def _add_turn(self, instruction: str) -> str:
        dims, survivors = self._scene_state(instruction)
        additions_inner = extract_input_block(instruction, ADD_OBJECTS_OPEN, ADD_OBJECTS_CLOSE)
        additions = {
            name: BBoxDims(float(v["h"]), float(v["w"]), float(v["d"]))
            for name, v in json.loads(additions_inner).items()
        }
        obstacle_layout = apply_placements(
            [(r.name, _DimsOnly(dims[r.name])) for r in survivors],
            survivors, "room", self.bounds,
        )
        new_objects = place_incremental(
            list(additions.items()), self.bounds, self.placer_config,
            obstacles=obstacle_layout.objects,
        )
        records = list(survivors) + placements_of(
            SceneLayout("room", self.bounds, tuple(new_objects))
        )
        return serialize_layout(records, OutputBlockKind.ADDED_OUTPUT)

    def _remove_turn(self, instruction: str) -> str:
        dims, current = self._scene_state(instruction)
        deletions_inner = extract_input_block(
            instruction, DELETE_OBJECTS_OPEN, DELETE_OBJECTS_CLOSE
        )
        descriptions = json.loads(deletions_inner)
        targets = match_descriptions(descriptions, [(r.name, "") for r in current])
        survivors = [r for r in current if r.name not in targets]
        return serialize_layout(survivors, OutputBlockKind.DELETED_OUTPUT)


class _DimsOnly:
    def __init__(self, dims: BBoxDims, category: str = ""):
        self.dims = dims
        self.category = category


def build_backend(config: BackendConfig, bounds: RoomBounds | None = None) -> CompletionBackend:
    if config.kind is BackendKind.REPLAY:
        return ReplayBackend(config.replay_script)
    if config.kind is BackendKind.REMOTE:
        return RemoteBackend(config)
    if bounds is None:
        raise ValueError("heuristic backend needs room bounds")
    return HeuristicBackend(bounds, PlacerConfig(seed=config.seed))


def match_descriptions(
    descriptions: Sequence[str], candidates: Sequence[tuple[str, str]]
) -> list[str]:
    """Resolve plain-language descriptions to distinct instance names.

    Greedy best Jaccard match over name plus category tokens, claiming each
    target at most once; a description no candidate matches raises
    UnknownTarget.
    """
    claimed: list[str] = []
    for description in descriptions:
        query = tokenize(description)
        best_name = None
        best_score = 0.0
        for name, category in candidates:
            if name in claimed:
                continue
            score = jaccard(query, tokenize(name) | tokenize(category))
            if score > best_score or (
                score == best_score and score > 0.0
                and best_name is not None and name < best_name
            ):
                best_name, best_score = name, score
        if best_name is None or best_score <= 0.0:
            raise UnknownTarget(f"no current object matches {description!r}")
        claimed.append(best_name)
    return claimed


class Phase(str, Enum):
    CREATED = "created"
    GENERATED = "generated"
    EDITED = "edited"
    FAILED = "failed"


@dataclass
class Session:
    request: DesignRequest
    bounds: RoomBounds
    instances: list[tuple[str, AssetRecord]]
    backend: CompletionBackend
    templates: PromptTemplates
    max_history_chars: int = 8000
    history: list[tuple[str, str]] = field(default_factory=list)
    layout: SceneLayout | None = None
    phase: Phase = Phase.CREATED

    @property
    def instance_names(self) -> list[str]:
        return [name for name, _ in self.instances]

    def _capped_history(self) -> list[tuple[str, str]]:
        kept: list[tuple[str, str]] = []
        budget = self.max_history_chars
        for role, text in reversed(self.history):
            if budget - len(text) < 0:
                break
            budget -= len(text)
            kept.append((role, text))
        return list(reversed(kept))

    def _converse(self, instruction: str, kind: OutputBlockKind,
                  expected: set[str]):
        """One instruction with a single retry on parse failure."""
        last_error: ParseError | None = None
        raw = ""
        for _ in range(2):
            raw = self.backend.complete(instruction, self._capped_history())
            try:
                return parse_output(raw, kind, expected), raw
            except ParseError as exc:
                last_error = exc
        raise _TurnParseFailure(raw, last_error)


class _TurnParseFailure(Exception):
    def __init__(self, raw: str, cause: ParseError | None):
        super().__init__(str(cause))
        self.raw = raw
        self.cause = cause


def create_session(
    request: DesignRequest,
    catalog: AssetCatalog,
    backend: CompletionBackend | BackendConfig,
    bounds: RoomBounds,
    templates: PromptTemplates | None = None,
    max_history_chars: int | None = None,
) -> Session:
    """Resolve the request against the catalog; no backend call happens yet."""
    instances = retrieve_many(request.items, catalog)
    if isinstance(backend, BackendConfig):
        if max_history_chars is None:
            max_history_chars = backend.max_history_chars
        backend = build_backend(backend, bounds)
    return Session(
        request=request,
        bounds=bounds,
        instances=instances,
        backend=backend,
        templates=templates or default_templates(),
        max_history_chars=max_history_chars if max_history_chars is not None else 8000,
    )


def run_generation(session: Session) -> SceneLayout:
    """First design turn; on success the session moves to the generated phase."""
    if session.phase is not Phase.CREATED:
        raise SessionPhaseError(f"generation requires a fresh session, phase is {session.phase.value}")
    instruction = render_generation_prompt(session.request, session.instances, session.templates)
    try:
        records, raw = session._converse(
            instruction, OutputBlockKind.TASK_OUTPUT, set(session.instance_names)
        )
    except _TurnParseFailure as failure:
        session.phase = Phase.FAILED
        raise GenerationFailed(
            f"could not parse design output: {failure.cause}", raw=failure.raw
        ) from failure.cause
    layout = apply_placements(
        session.instances, records, session.request.room_type, session.bounds
    )
    session.history.extend([("user", instruction), ("assistant", raw)])
    session.layout = layout
    session.phase = Phase.GENERATED
    return layout


def compose_edit_instruction(layout: SceneLayout, rendered_prompt: str) -> str:
    """Edit instruction with the current scene re-embedded ahead of the template."""
    dims_json = format_dims_json([(o.name, o.dims) for o in layout.objects])
    current_block = serialize_layout(placements_of(layout), OutputBlockKind.TASK_OUTPUT)
    return (
        f"{TASK_OBJECTS_OPEN}\n{dims_json}\n{TASK_OBJECTS_CLOSE}\n\n"
        f"{current_block}\n\n{rendered_prompt}"
    )


def _decollide(name: str, taken: set[str]) -> str:
    candidate = name
    bump = 2
    while candidate in taken:
        candidate = f"{name}_{bump}"
        bump += 1
    return candidate


def run_edit(session: Session, edit: EditRequest, catalog: AssetCatalog | None = None) -> SceneLayout:
    """One add or remove turn; failures leave layout and phase unchanged."""
    if session.phase not in (Phase.GENERATED, Phase.EDITED):
        raise SessionPhaseError(f"editing requires a generated layout, phase is {session.phase.value}")
    layout = session.layout
    assert layout is not None
    current_names = layout.names()

    if edit.kind is EditKind.ADD:
        items = list(edit.items)
        if items and isinstance(items[0], RequestItem):
            if catalog is None:
                raise ValueError("adding by description requires a catalog")
            pairs = retrieve_many(items, catalog)
        else:
            pairs = items
        taken = set(current_names)
        named_pairs = []
        for name, record in pairs:
            final = _decollide(name, taken)
            taken.add(final)
            named_pairs.append((final, record))
        prompt = render_add_prompt(named_pairs, session.templates)
        expected = set(current_names) | {name for name, _ in named_pairs}
        kind = OutputBlockKind.ADDED_OUTPUT
        order = current_names + [name for name, _ in named_pairs]
        dims_by_name = {o.name: o for o in layout.objects}
        dims_by_name.update({name: rec for name, rec in named_pairs})
    else:
        descriptions: list[str] = []
        for item in edit.items:
            descriptions.extend([item.description] * item.quantity)
        targets = match_descriptions(
            descriptions, [(o.name, o.category) for o in layout.objects]
        )
        prompt = render_remove_prompt(list(edit.items), session.templates)
        expected = set(current_names) - set(targets)
        if not expected:
            raise UnknownTarget("removal targets every object; at least one must remain")
        kind = OutputBlockKind.DELETED_OUTPUT
        order = [n for n in current_names if n in expected]
        dims_by_name = {o.name: o for o in layout.objects}

    instruction = compose_edit_instruction(layout, prompt)
    try:
        records, raw = session._converse(instruction, kind, expected)
    except _TurnParseFailure as failure:
        raise EditFailed(
            f"could not parse edit output: {failure.cause}", raw=failure.raw
        ) from failure.cause

    new_layout = apply_placements(
        [(name, dims_by_name[name]) for name in order],
        records, layout.room_type, session.bounds,
    )
    session.history.extend([("user", instruction), ("assistant", raw)])
    session.layout = new_layout
    session.phase = Phase.EDITED
    return new_layout


def default_bounds_for(room_type: str) -> RoomBounds:
    """Invented per-room-type defaults, overridable by every caller."""
    if "living" in room_type.lower():
        return RoomBounds(half_x=3.0, half_z=2.5, height=3.0)
    return RoomBounds(half_x=2.0, half_z=2.0, height=3.0)
