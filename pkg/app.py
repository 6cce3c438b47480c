import io

from flask import Flask, jsonify, request

import cache
import cli

MAX_ARGV = 64
HELP_FLAGS = ("-h", "--help")

app = Flask(__name__)
cache.init_db()


def _reply(success, exit_code, output, message, status):
    body = {"success": success, "exit_code": exit_code, "output": output, "message": message}
    return jsonify(body), status


@app.route("/api/run", methods=["POST"])
def run():
    data = request.get_json(silent=True)
    if not isinstance(data, dict) or not data:
        return _reply(False, None, None, "Request body must be JSON", 400)

    argv = data.get("argv")
    if not isinstance(argv, list) or not argv or not all(isinstance(arg, str) for arg in argv):
        return _reply(False, None, None, "'argv' must be a nonempty list of strings", 400)

    if len(argv) > MAX_ARGV:
        return _reply(False, None, None, f"'argv' must hold {MAX_ARGV} entries or fewer", 400)

    if any(arg == "--out" or arg.startswith("--out=") for arg in argv):
        return _reply(False, None, None, "--out is not available over HTTP", 400)

    if any(arg in HELP_FLAGS for arg in argv):
        return _reply(False, None, None, "--help is only available on the command line", 400)

    cached = cache.get_cached_report(argv)
    if cached is not None:
        return _reply(True, 0, cached, "cached", 200)

    stdout, stderr = io.StringIO(), io.StringIO()
    try:
        exit_code = cli.run(argv, stdout, stderr)
    except Exception:
        app.logger.exception("run failed for %r", argv)
        return _reply(False, None, None, "Internal server error", 500)

    if exit_code == 0:
        cache.cache_report(argv, stdout.getvalue())
        return _reply(True, 0, stdout.getvalue(), "ok", 200)
    status = 400 if exit_code == 2 else 422
    return _reply(False, exit_code, None, stderr.getvalue().strip(), status)


@app.route("/api/status", methods=["GET"])
def status():
    return jsonify({"status": "ok"})


@app.after_request
def add_cors_headers(response):
    response.headers["Access-Control-Allow-Origin"] = "*"
    response.headers["Access-Control-Allow-Headers"] = "Content-Type"
    response.headers["Access-Control-Allow-Methods"] = "GET, POST, OPTIONS"
    return response


if __name__ == "__main__":
    app.run(debug=True)
