"""Contract test: drives a live `evspace serve` and validates every response
against the schemas in docs/schemas."""

import json
import socket
import subprocess
import sys
import tempfile
import time
import urllib.error
import urllib.request
from pathlib import Path

import jsonschema
from referencing import Registry, Resource


def load_schemas(directory):
    resources = []
    for path in sorted(Path(directory).glob("*.schema.json")):
        doc = json.loads(path.read_text())
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(resources)


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class Client:
    def __init__(self, port):
        self.base = f"http://127.0.0.1:{port}"

    def call(self, method, path, body=None):
        data = None if body is None else json.dumps(body).encode()
        req = urllib.request.Request(self.base + path, data=data, method=method,
                                     headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=5) as res:
                return res.status, json.loads(res.read() or b"null")
        except urllib.error.HTTPError as err:
            return err.code, json.loads(err.read())


def main(evspace, schema_dir, sample):
    registry = load_schemas(schema_dir)
    failures = []

    def check(label, instance, schema_id, status=None, expected_status=None):
        schema = registry.contents(schema_id)
        validator = jsonschema.Draft202012Validator(schema, registry=registry)
        errors = [e.message for e in validator.iter_errors(instance)]
        if errors:
            failures.append(f"{label}: {errors[0]}")
        if expected_status is not None and status != expected_status:
            failures.append(f"{label}: HTTP {status}, expected {expected_status}")

    with tempfile.TemporaryDirectory() as tmp:
        port = free_port()
        proc = subprocess.Popen(
            [evspace, "--library", str(Path(tmp) / "lib.json"), "serve", "--port", str(port)],
            stderr=subprocess.DEVNULL)
        try:
            api = Client(port)
            for _ in range(100):
                try:
                    api.call("GET", "/api/statuses")
                    break
                except OSError:
                    time.sleep(0.05)

            status, body = api.call("GET", "/api/statuses")
            check("statuses", body, "statuses.schema.json", status, 200)
            if body != registry.contents("status.schema.json")["enum"]:
                failures.append("status schema enum differs from GET /api/statuses")

            status, body = api.call("GET", "/api/commands")
            check("commands", body, "commands.schema.json", status, 200)

            define = {"name": "npv_at_12", "params": [{"name": "ncf", "kind": "field"}],
                      "source": "NPV(ncf, 12%)", "description": "hurdle"}
            check("define request", define, "define-request.schema.json")
            status, body = api.call("POST", "/api/methods", define)
            check("define", body, "envelope.schema.json", status, 201)
            check("define data", body["data"], "command.schema.json")
            status, body = api.call("POST", "/api/methods", define)
            check("define again", body, "envelope.schema.json", status, 409)
            status, body = api.call("POST", "/api/methods", {**define, "name": "b", "source": "x +"})
            check("define syntax", body, "envelope.schema.json", status, 400)

            project = json.loads(Path(sample).read_text())
            check("project document", project, "project.schema.json")
            status, body = api.call("POST", "/api/projects", project)
            check("project upload", body, "project-created.schema.json", status, 201)
            pid = body["data"]["id"]
            status, body = api.call("GET", f"/api/projects/{pid}")
            check("project read", body, "project.schema.json", status, 200)
            status, body = api.call("GET", "/api/projects/nope")
            check("project missing", body, "envelope.schema.json", status, 404)
            ragged = {**project, "fields": {"net_cash_flow": [1, 2]}}
            status, body = api.call("POST", "/api/projects", ragged)
            check("project ragged", body, "envelope.schema.json", status, 400)
            if body.get("status") != "TypeError":
                failures.append("ragged project: expected TypeError")

            evaluations = [
                ({"method": "NPV", "project_id": pid,
                  "bindings": {"ncf": "net_cash_flow", "rate": 0.1}}, 200),
                ({"method": "npv_at_12", "project_id": pid, "bindings": {"ncf": "net_cash_flow"}}, 200),
                ({"method": "IRR", "project_id": pid, "bindings": {"ncf": "missing"}}, 200),
                ({"method": "IPR", "bindings": {"profit": 1, "investment": 0}}, 200),
                ({"method": "nothing", "bindings": {}}, 404),
                ({"method": "NPV", "project_id": "p999", "bindings": {}}, 404),
            ]
            for request, expected in evaluations:
                check("evaluate request", request, "evaluate-request.schema.json")
                status, body = api.call("POST", "/api/evaluate", request)
                check(f"evaluate {request['method']}", body, "envelope.schema.json", status, expected)

            sweep = {"method": "NPV", "project_id": pid,
                     "bindings": {"ncf": "net_cash_flow", "rate": 0.1},
                     "vary": "rate", "deltas": "-0.5:0.5:11"}
            check("sweep request", sweep, "sensitivity-request.schema.json")
            status, body = api.call("POST", "/api/sensitivity", sweep)
            check("sweep", body, "envelope.schema.json", status, 200)
            check("sweep data", body["data"], "sweep.schema.json")
            status, body = api.call("POST", "/api/sensitivity", {**sweep, "vary": "speed"})
            check("sweep bad vary", body, "envelope.schema.json", status, 400)
            if body.get("status") != "ArityError":
                failures.append("sweep with unknown vary: expected ArityError")

            status, body = api.call("DELETE", "/api/methods/npv_at_12")
            check("remove", body, "envelope.schema.json", status, 200)
            status, body = api.call("DELETE", "/api/methods/NPV")
            check("remove built-in", body, "envelope.schema.json", status, 409)
        finally:
            proc.terminate()
            proc.wait(timeout=10)

    for f in failures:
        print("FAIL", f)
    print(f"{len(failures)} contract failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:4]))
