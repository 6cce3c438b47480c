"""Tests for the HTTP front end over the flc command line."""
import json
import logging
from unittest.mock import patch

import pytest

import cache
import cli

RELAX_ARGV = ["relax", "--alpha", "1", "--c", "1", "--y0", "2", "--t-max", "1", "--steps", "1"]


def post_run(client, body):
    return client.post("/api/run", data=json.dumps(body), content_type="application/json")


class TestStatus:
    def test_returns_ok(self, client):
        resp = client.get("/api/status")
        assert resp.status_code == 200
        assert resp.get_json()["status"] == "ok"


class TestRunValidation:
    def test_missing_json_body(self, client):
        resp = client.post("/api/run", content_type="text/plain", data="relax")
        assert resp.status_code == 400
        assert resp.get_json()["success"] is False

    @pytest.mark.parametrize("body", [
        {"args": ["relax"]},
        {"argv": "relax --alpha 1"},
        {"argv": []},
        {"argv": ["relax", 1]},
    ])
    def test_bad_argv(self, client, body):
        resp = post_run(client, body)
        assert resp.status_code == 400
        assert resp.get_json()["exit_code"] is None

    def test_argv_too_long(self, client):
        resp = post_run(client, {"argv": ["relax"] * 65})
        assert resp.status_code == 400
        assert "64" in resp.get_json()["message"]

    @pytest.mark.parametrize("flag", [["--out", "x.csv"], ["--out=x.csv"]])
    def test_out_rejected(self, client, flag):
        resp = post_run(client, {"argv": ["defect"] + flag})
        assert resp.status_code == 400
        assert "--out" in resp.get_json()["message"]


    @pytest.mark.parametrize("argv", [["relax", "--help"], ["-h"]])
    def test_help_rejected(self, client, argv):
        resp = post_run(client, {"argv": argv})
        assert resp.status_code == 400
        assert "--help" in resp.get_json()["message"]
        assert cache.get_cached_report(argv) is None

    def test_list_body(self, client):
        resp = post_run(client, ["relax"])
        assert resp.status_code == 400
        assert resp.get_json()["success"] is False


class TestRunBehavior:
    def test_success(self, client):
        resp = post_run(client, {"argv": RELAX_ARGV})
        assert resp.status_code == 200
        body = resp.get_json()
        assert body["success"] is True
        assert body["exit_code"] == 0
        assert body["message"] == "ok"
        assert body["output"].startswith("t,y\n")

    def test_second_call_is_cached(self, client):
        first = post_run(client, {"argv": RELAX_ARGV}).get_json()
        with patch.object(cli, "run", wraps=cli.run) as mock_run:
            second = post_run(client, {"argv": RELAX_ARGV}).get_json()
        mock_run.assert_not_called()
        assert second["message"] == "cached"
        assert second["output"] == first["output"]

    def test_usage_error(self, client):
        resp = post_run(client, {"argv": ["relax", "--alpha", "1.5"]})
        assert resp.status_code == 400
        body = resp.get_json()
        assert body["exit_code"] == 2
        assert "UsageError" in body["message"]

    def test_computation_error(self, client):
        resp = post_run(client, {"argv": ["eval", "--function", "gamma", "--at", "0"]})
        assert resp.status_code == 422
        body = resp.get_json()
        assert body["exit_code"] == 1
        assert body["message"].startswith("flc: gamma: PoleError")

    def test_failures_are_not_cached(self, client):
        argv = ["eval", "--function", "gamma", "--at", "0"]
        post_run(client, {"argv": argv})
        assert cache.get_cached_report(argv) is None

    def test_oversized_stage(self, client):
        resp = post_run(client, {"argv": ["integrate", "--const", "1", "--cantor", "40"]})
        assert resp.status_code == 400
        assert resp.get_json()["exit_code"] == 2

    def test_verbose_keeps_root_level(self, client):
        root = logging.getLogger()
        before = root.level
        resp = post_run(client, {"argv": ["defect", "--verbose"]})
        assert resp.status_code == 200
        assert root.level == before

    @patch("cli.run", side_effect=Exception("boom"))
    def test_exception_returns_500(self, mock_run, client):
        resp = post_run(client, {"argv": RELAX_ARGV})
        assert resp.status_code == 500
        assert resp.get_json()["message"] == "Internal server error"


class TestCORS:
    def test_cors_on_success(self, client):
        resp = post_run(client, {"argv": RELAX_ARGV})
        assert resp.headers["Access-Control-Allow-Origin"] == "*"

    def test_cors_on_error(self, client):
        resp = client.post("/api/run", content_type="text/plain", data="bad")
        assert resp.headers["Access-Control-Allow-Origin"] == "*"
