"""A scripted protocol mock used by the client, orchestrator, and acceptance tests.

Unlike the real recommenders it answers deterministically from a script:
how many polls before the model is ready, what lists to return, whether to
fail. Every request is logged and the fetched training-set bytes are kept,
so tests can assert lifecycle order, payload equality, and the absence of
test-set leakage.
"""

from __future__ import annotations

import threading

import requests

from reclab.httpd import AppServer, HttpResponse, Router, json_response


class ScriptedRecommender:
    def __init__(
        self,
        model_polls_before_ready: int = 1,
        rec_polls_before_ready: int = 1,
        fail_training: bool = False,
        never_ready: bool = False,
        list_builder=None,
        fetch_training: bool = True,
    ):
        self.model_polls_before_ready = model_polls_before_ready
        self.rec_polls_before_ready = rec_polls_before_ready
        self.fail_training = fail_training
        self.never_ready = never_ready
        self.list_builder = list_builder or self._default_lists
        self.fetch_training = fetch_training

        self.log: list[tuple[str, str]] = []
        self.training_bytes: bytes | None = None
        self.train_request: dict | None = None
        self.rec_request: dict | None = None
        self._lock = threading.Lock()
        self._model_polls = 0
        self._rec_polls = 0
        self._model_ready = False

        self.router = Router()
        self.router.add("POST", "/model", self._post_model)
        self.router.add("GET", "/model", self._get_model)
        self.router.add("DELETE", "/model", self._delete_model)
        self.router.add("POST", "/recommendation", self._post_recommendation)
        self.router.add("GET", "/recommendation", self._get_recommendation)

    @staticmethod
    def _default_lists(users, k):
        return [{"user": u, "items": [f"mock-{n}" for n in range(k)]} for u in users]

    def start(self) -> AppServer:
        self.server = AppServer(self.router, host="127.0.0.1", port=0)
        return self.server.start()

    # -- handlers --

    def _post_model(self, request) -> HttpResponse:
        self.log.append(("POST", "/model"))
        self.train_request = request.json()
        if self.fetch_training:
            resp = requests.get(self.train_request["training_set_uri"], timeout=30)
            resp.raise_for_status()
            self.training_bytes = resp.content
        with self._lock:
            self._model_polls = 0
            self._model_ready = False
        return json_response({"status": "training"}, status=202)

    def _get_model(self, request) -> HttpResponse:
        self.log.append(("GET", "/model"))
        if self.fail_training:
            return json_response({"status": "failed", "detail": "scripted training failure"})
        if self.never_ready:
            return json_response({"status": "training"})
        with self._lock:
            self._model_polls += 1
            if self._model_polls >= self.model_polls_before_ready:
                self._model_ready = True
                return json_response({"status": "ready"})
        return json_response({"status": "training"})

    def _delete_model(self, request) -> HttpResponse:
        self.log.append(("DELETE", "/model"))
        with self._lock:
            self._model_ready = False
        return HttpResponse(status=204)

    def _post_recommendation(self, request) -> HttpResponse:
        self.log.append(("POST", "/recommendation"))
        with self._lock:
            if not self._model_ready:
                return json_response(
                    {"status": "failed", "detail": "recommendation requested before ready"},
                    status=409,
                )
            self._rec_polls = 0
        self.rec_request = request.json()
        return json_response({"status": "computing"}, status=202)

    def _get_recommendation(self, request) -> HttpResponse:
        self.log.append(("GET", "/recommendation"))
        with self._lock:
            self._rec_polls += 1
            done = self._rec_polls >= self.rec_polls_before_ready
        if not done:
            return json_response({"status": "computing"})
        lists = self.list_builder(self.rec_request["users"], self.rec_request["k"])
        return json_response({"status": "ready", "recommendations": lists})
