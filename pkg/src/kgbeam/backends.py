"""Pluggable relation selectors behind a uniform batched request interface.

A backend receives fully rendered prompts and returns plain text; it never
rewrites the prompt. Batching is a throughput detail: a batch of N requests
must produce exactly the responses of N singleton calls in order. Three
local backends (scripted, random, and the script-driven oracle in the synth
module) are pure functions of prompt text and their own seed/state, which is
what makes runs replayable.
"""

from __future__ import annotations

import logging
import math
import os
import random
import threading
import time
from dataclasses import dataclass, field

import requests

from .prompts import parse_answers, parse_routing_fields, render_direct_prompt

logger = logging.getLogger(__name__)

TAG_ROUTING = "routing"
TAG_EXTRACTION = "extraction"
TAG_DIRECT = "cot"

KIND_REMOTE = "remote-chat"
KIND_RANDOM = "random"
KIND_SCRIPTED = "scripted"
KIND_DIRECT = "cot-direct"

ROUTING_MAX_OUTPUT = 64
EXTRACTION_MAX_OUTPUT = 160
DIRECT_MAX_OUTPUT = 160

DEFAULT_API_KEY_ENV = "KGBEAM_API_KEY"


def estimate_tokens(text: str) -> int:
    """Deterministic token estimate: ceiling(character count / 4).

    This is an estimate, not a tokenizer; swap in a real tokenizer adapter
    via ``Backend.token_estimator`` when exact counts matter. Comparisons
    between runs that use the same estimator remain valid.
    """
    return math.ceil(len(text) / 4)


@dataclass(frozen=True)
class SelectorRequest:
    prompt: str
    max_output: int
    temperature: float = 0.0
    tag: str = TAG_ROUTING


@dataclass(frozen=True)
class SelectorResponse:
    text: str
    input_token_estimate: int
    output_token_estimate: int
    latency: float = 0.0
    error: str | None = None
    prompt_overflow: bool = False


@dataclass(frozen=True)
class BackendConfig:
    kind: str = KIND_REMOTE
    endpoint: str = ""
    model_name: str = ""
    seed: int = 42
    request_timeout: float = 60.0
    max_retries: int = 3
    api_key_env: str = DEFAULT_API_KEY_ENV
    max_prompt_tokens: int | None = None


class Backend:
    """Base selector: subclasses implement ``_respond(request) -> text``."""

    # Controllers check this to substitute uniform tail sampling for the
    # deterministic first-tails rule.
    random_tails = False

    def __init__(self, max_prompt_tokens: int | None = None) -> None:
        self.max_prompt_tokens = max_prompt_tokens
        self.call_count = 0
        self._lock = threading.Lock()

    def select_batch(self, requests_: list[SelectorRequest]) -> list[SelectorResponse]:
        """Answer each request in order; one response per request."""
        return [self._serve(r) for r in requests_]

    def _serve(self, request: SelectorRequest) -> SelectorResponse:
        started = time.perf_counter()
        error: str | None = None
        try:
            text = self._respond(request)
        except Exception as exc:
            text, error = "", str(exc)
        return self._package(request, text, time.perf_counter() - started, error)

    def _package(
        self, request: SelectorRequest, text: str, latency: float, error: str | None
    ) -> SelectorResponse:
        input_estimate = estimate_tokens(request.prompt)
        overflow = (
            self.max_prompt_tokens is not None and input_estimate > self.max_prompt_tokens
        )
        if overflow:
            logger.warning(
                "prompt estimate %d tokens exceeds limit %d (tag=%s); sent anyway",
                input_estimate,
                self.max_prompt_tokens,
                request.tag,
            )
        with self._lock:
            self.call_count += 1
        return SelectorResponse(
            text=text,
            input_token_estimate=input_estimate,
            output_token_estimate=estimate_tokens(text),
            latency=latency,
            error=error,
            prompt_overflow=overflow,
        )

    def _respond(self, request: SelectorRequest) -> str:
        raise NotImplementedError


class ScriptedBackend(Backend):
    """Canned prompt -> response map, for tests and deterministic replays."""

    def __init__(
        self, responses: dict[str, str], default: str | None = None
    ) -> None:
        super().__init__()
        self.responses = dict(responses)
        self.default = default

    def _respond(self, request: SelectorRequest) -> str:
        if request.prompt in self.responses:
            return self.responses[request.prompt]
        if self.default is not None:
            return self.default
        raise KeyError(f"no scripted response for prompt: {request.prompt[:80]!r}")


def random_relation_choice(
    candidates: list[str], width: int, rng: random.Random
) -> str:
    """Sample min(width, n) candidates uniformly without replacement.

    The result is formatted one relation per line so the routing parser
    accepts it verbatim. This selector never emits STOP.
    """
    count = min(width, len(candidates))
    return "\n".join(rng.sample(candidates, count))


class RandomBackend(Backend):
    """Seeded uniform selector used as the no-model control.

    Responses are a pure function of (seed, call index, candidates, width):
    candidates and width are read back off the prompt text, the sole channel
    a real model would have. Non-routing requests get an empty reply, so a
    run wired entirely to this backend produces no answers; the harness pairs
    it with a real extraction backend instead.
    """

    random_tails = True

    def __init__(self, seed: int) -> None:
        super().__init__()
        self.seed = seed
        self.rng = random.Random(seed)

    def _respond(self, request: SelectorRequest) -> str:
        if request.tag != TAG_ROUTING:
            return ""
        fields = parse_routing_fields(request.prompt)
        with self._lock:
            return random_relation_choice(
                list(fields.candidates), fields.width, self.rng
            )

    def choose_tail(self, tails: list[str]) -> str:
        """Uniform tail pick for controllers that expand this backend's choices."""
        with self._lock:
            return self.rng.choice(tails)


class RemoteChatBackend(Backend):
    """OpenAI-compatible chat-completions client with retrying POSTs.

    ``config.endpoint`` is used verbatim as the chat-completions URL. The
    bearer token comes from the environment variable named in the config;
    credentials never live in config files. Transport errors and 5xx replies
    are retried with exponential backoff; a request that still fails comes
    back as an empty response carrying the error string rather than raising,
    so one bad call cannot abort a long run.
    """

    def __init__(self, config: BackendConfig) -> None:
        super().__init__(max_prompt_tokens=config.max_prompt_tokens)
        if not config.endpoint:
            raise ValueError("remote backend requires an endpoint URL")
        self.config = config

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.config.api_key_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def _respond(self, request: SelectorRequest) -> str:
        payload = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_output,
        }
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                time.sleep(min(2 ** (attempt - 1), 30))
            try:
                reply = requests.post(
                    self.config.endpoint,
                    json=payload,
                    headers=self._headers(),
                    timeout=self.config.request_timeout,
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if reply.status_code >= 500:
                last_error = RuntimeError(f"server error {reply.status_code}")
                continue
            reply.raise_for_status()
            body = reply.json()
            return body["choices"][0]["message"]["content"]
        raise RuntimeError(
            f"request failed after {self.config.max_retries + 1} attempts: {last_error}"
        )


@dataclass(frozen=True)
class AnswerOutcome:
    """Answers plus accounting for a single extraction or direct-answer call."""

    answers: tuple[str, ...]
    failure: bool
    response: SelectorResponse | None = None

    @property
    def llm_calls(self) -> int:
        return 0 if self.response is None else 1

    @property
    def input_tokens(self) -> int:
        return 0 if self.response is None else self.response.input_token_estimate

    @property
    def output_tokens(self) -> int:
        return 0 if self.response is None else self.response.output_token_estimate

    @property
    def error(self) -> str | None:
        return None if self.response is None else self.response.error


def direct_answer(question: str, backend: Backend) -> AnswerOutcome:
    """Answer from the question text alone: one call, no graph access."""
    request = SelectorRequest(
        prompt=render_direct_prompt(question),
        max_output=DIRECT_MAX_OUTPUT,
        temperature=0.0,
        tag=TAG_DIRECT,
    )
    response = backend.select_batch([request])[0]
    parsed = parse_answers(response.text)
    failure = parsed.failure or not parsed.answers
    return AnswerOutcome(answers=parsed.answers, failure=failure, response=response)
