"""Command-line client and service launcher.

Exit codes: 0 success (login accepted / password recovered), 1 protocol
refusal (reject, empty recovery, lockout), 2 error. A recovered password is
the only thing printed to stdout so the tool composes in scripts; everything
else goes to stderr.
"""

from __future__ import annotations

import argparse
import getpass
import json
import secrets
import sys

from . import client as net
from . import wire
from .games import format_selftest, run_selftest
from .group import generate_params
from .localpr import PRINTABLE, PasswordSpec, local_recover, local_register
from .server import RecoveryServer, ServerConfig
from .vectors import REAL_2048, TEST_P64

EXIT_OK = 0
EXIT_REFUSED = 1
EXIT_ERROR = 2

try:
    DEFAULT_LOGIN = getpass.getuser()
except Exception:
    DEFAULT_LOGIN = "user"


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _parse_addr(addr: str) -> tuple[str, int]:
    host, _, port = addr.rpartition(":")
    return host or "127.0.0.1", int(port)


def _group_for(args):
    if getattr(args, "bits", None):
        _say(f"generating fresh {args.bits}-bit group parameters")
        return generate_params(args.bits)
    return TEST_P64 if args.toy else REAL_2048


def _spec_for(args) -> PasswordSpec:
    return PasswordSpec(n=args.n, t=args.t, alphabet=args.alphabet)


def _read_password(args, prompt: str) -> str:
    if args.password is not None:
        return args.password
    return getpass.getpass(prompt, stream=sys.stderr)


def _psk(args):
    return args.psk.encode() if args.psk else None


def _connect(args) -> net.ServerConnection:
    host, port = _parse_addr(args.server)
    return net.ServerConnection(host, port, psk=_psk(args))


def cmd_register(args) -> int:
    password = _read_password(args, "password to register: ")
    rng = secrets.SystemRandom()
    spec = _spec_for(args)
    if args.mode == "local":
        return _local_register(args, spec, password, rng)
    params = _group_for(args)
    with _connect(args) as conn:
        if args.mode == "hash":
            net.register_hash(conn, spec, params, args.login, password, rng)
        elif args.mode == "cr":
            net.register_cr(conn, spec, params, args.login, password, rng)
        elif args.mode == "simple":
            net.register_simple(conn, spec, args.login, password)
        elif args.mode == "substring":
            net.register_substring(conn, spec, params, args.login, password)
    _say(f"registered {args.login!r} ({args.mode} mode)")
    return EXIT_OK


def _local_register(args, spec, password, rng) -> int:
    if not args.store:
        _say("--store FILE is required in local mode")
        return EXIT_ERROR
    params = _group_for(args)
    blob = local_register(spec, params.q, password, rng)
    with open(args.store, "w", encoding="utf-8") as fh:
        json.dump(wire.blob_to_wire(blob), fh)
    _say(f"recovery blob written to {args.store}")
    return EXIT_OK


def cmd_login(args) -> int:
    password = _read_password(args, "password: ")
    with _connect(args) as conn:
        if args.mode == "cr":
            accepted = net.login_cr(conn, args.login, password)
        else:
            accepted = net.login_hash(conn, args.login, password)
    _say("accepted" if accepted else "rejected")
    return EXIT_OK if accepted else EXIT_REFUSED


def cmd_recover(args) -> int:
    guess = args.guess if args.guess is not None else getpass.getpass(
        "best guess of the password: ", stream=sys.stderr
    )
    if args.mode == "local":
        return _local_recover(args, guess)
    rng = secrets.SystemRandom()
    with _connect(args) as conn:
        if args.mode == "hash":
            password = net.recover_hash(conn, args.login, guess).password
        elif args.mode == "cr":
            password = net.recover_cr(conn, args.login, guess, rng).password
        elif args.mode == "simple":
            password = net.recover_simple(conn, args.login, guess)
        elif args.mode == "substring":
            spec = _spec_for(args)
            bits = 1024 if args.toy else 2048
            password = net.recover_substring(conn, spec, args.login, guess, rng, bits=bits)
    return _emit(password)


def _local_recover(args, guess) -> int:
    if not args.store:
        _say("--store FILE is required in local mode")
        return EXIT_ERROR
    with open(args.store, encoding="utf-8") as fh:
        blob = wire.blob_from_wire(json.load(fh))
    return _emit(local_recover(blob, guess).password)


def _emit(password) -> int:
    if password is None:
        _say("recovery failed: guess not close enough")
        return EXIT_REFUSED
    print(password)
    return EXIT_OK


def cmd_local_register(args) -> int:
    args.mode = "local"
    return cmd_register(args)


def cmd_local_recover(args) -> int:
    args.mode = "local"
    return cmd_recover(args)


def cmd_serve(args) -> int:
    host, port = _parse_addr(args.listen)
    config = ServerConfig(
        host=host,
        port=port,
        store_path=args.store,
        params=TEST_P64 if args.mode == "toy" else REAL_2048,
        max_attempts=args.max_attempts,
        lockout_seconds=args.lockout_seconds,
        psk=_psk(args),
        min_paillier_bits=256 if args.mode == "toy" else 1024,
    )
    server = RecoveryServer(config)
    _say(f"serving on {server.address[0]}:{server.address[1]} ({args.mode} mode)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return EXIT_OK


def cmd_selftest(args) -> int:
    rng_note = f"trials={args.trials} seed={args.seed}"
    _say(f"running statistical battery ({rng_note}); this takes a few minutes at full size")
    report = run_selftest(trials=args.trials, seed=args.seed, json_path=args.json)
    print(format_selftest(report))
    if args.json:
        _say(f"JSON report written to {args.json}")
    return EXIT_OK if report["pass"] else EXIT_REFUSED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pwrecover",
        description="password recovery toolkit: client, local mode, service, selftest",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, modes, password_flag):
        p.add_argument("--server", default="127.0.0.1:7542", help="host:port of the service")
        p.add_argument("--mode", choices=modes, default=modes[0])
        p.add_argument("--login", default=DEFAULT_LOGIN)
        p.add_argument("--n", type=int, default=8, help="password length")
        p.add_argument("--t", type=int, default=5, help="positions that must match")
        p.add_argument("--alphabet", default=PRINTABLE)
        p.add_argument("--toy", action="store_true", help="64-bit test group instead of 2048-bit")
        p.add_argument("--bits", type=int, help="generate a fresh group of this size")
        p.add_argument("--store", help="blob file for local mode")
        p.add_argument("--psk", help="pre-shared key for frame MACs")
        p.add_argument(password_flag, dest="password" if password_flag == "--password" else "guess",
                       help="read from the terminal when omitted")

    reg = sub.add_parser("register", help="create an account with recovery data")
    common(reg, ["hash", "cr", "simple", "substring", "local"], "--password")
    reg.set_defaults(func=cmd_register)

    login = sub.add_parser("login", help="authenticate against the service")
    common(login, ["hash", "cr"], "--password")
    login.set_defaults(func=cmd_login)

    rec = sub.add_parser("recover", help="recover the password from a close guess")
    common(rec, ["hash", "cr", "simple", "substring", "local"], "--guess")
    rec.set_defaults(func=cmd_recover)

    lreg = sub.add_parser("local-register", help="register into a local blob file")
    common(lreg, ["local"], "--password")
    lreg.set_defaults(func=cmd_local_register)

    lrec = sub.add_parser("local-recover", help="recover from a local blob file")
    common(lrec, ["local"], "--guess")
    lrec.set_defaults(func=cmd_local_recover)

    serve = sub.add_parser("serve", help="run the recovery service")
    serve.add_argument("--listen", default="127.0.0.1:7542")
    serve.add_argument("--store", help="account store path (memory-only when omitted)")
    serve.add_argument("--mode", choices=["toy", "real"], default="real")
    serve.add_argument("--max-attempts", type=int, default=10)
    serve.add_argument("--lockout-seconds", type=float, default=900.0)
    serve.add_argument("--psk")
    serve.set_defaults(func=cmd_serve)

    selftest = sub.add_parser("selftest", help="run the statistical game battery")
    selftest.add_argument("--trials", type=int, default=10000)
    selftest.add_argument("--seed", type=int, default=2026)
    selftest.add_argument("--json", help="also write a machine-readable report here")
    selftest.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except net.ServerError as e:
        if e.code == "locked":
            _say(f"account locked until {e.extra.get('until')}")
            return EXIT_REFUSED
        _say(f"server refused: {e}")
        return EXIT_ERROR
    except (OSError, wire.FrameError) as e:
        _say(f"connection problem: {e}")
        return EXIT_ERROR
    except ValueError as e:
        _say(f"invalid input: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
