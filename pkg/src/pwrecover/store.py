"""Durable account store (JSON lines, atomic rewrite) and the attempt limiter."""

from __future__ import annotations

import json
import os
import time
from collections import defaultdict, deque

from .wire import account_from_wire, account_to_wire

STORE_FORMAT = "pwrecover-store"
STORE_VERSION = 1


class DuplicateLoginError(ValueError):
    pass


class UnknownLoginError(KeyError):
    pass


class AccountStore:
    """login -> account record, mirrored to a JSON-lines file when given a path.

    Writes go to a temp file that is renamed over the store, so a crash leaves
    either the old or the new state, never a torn one. Not itself thread-safe;
    the server serializes access.
    """

    def __init__(self, path: str = None):
        self.path = path
        self._accounts = {}
        if path and os.path.exists(path):
            self._load()

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            if header.get("format") != STORE_FORMAT or header.get("version") != STORE_VERSION:
                raise ValueError(f"unrecognized store file {self.path}")
            for line in fh:
                if not line.strip():
                    continue
                acct = account_from_wire(json.loads(line))
                login = _login_of(acct)
                self._accounts[login] = acct

    def _flush(self) -> None:
        if not self.path:
            return
        tmp = self.path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"format": STORE_FORMAT, "version": STORE_VERSION}) + "\n")
            for acct in self._accounts.values():
                fh.write(json.dumps(account_to_wire(acct), separators=(",", ":")) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self.path)

    def add(self, acct) -> None:
        login = _login_of(acct)
        if login in self._accounts:
            raise DuplicateLoginError(f"login {login!r} already registered")
        self._accounts[login] = acct
        self._flush()

    def lookup(self, login: str):
        try:
            return self._accounts[login]
        except KeyError:
            raise UnknownLoginError(login) from None

    def logins(self) -> list[str]:
        return sorted(self._accounts)

    def __len__(self) -> int:
        return len(self._accounts)


def _login_of(acct) -> str:
    login = getattr(acct, "login", None)
    if login is None:
        login = acct.record.login
    return login


class AttemptPolicy:
    """Sliding-window failure counter per login.

    A login with max_attempts failures inside the last `lockout` seconds is
    locked until the oldest of those failures ages out of the window.
    """

    def __init__(self, max_attempts: int = 10, lockout: float = 900.0, clock=time.time):
        self.max_attempts = max_attempts
        self.lockout = lockout
        self.clock = clock
        self._failures = defaultdict(deque)

    def _prune(self, login: str, now: float) -> deque:
        window = self._failures[login]
        while window and window[0] <= now - self.lockout:
            window.popleft()
        return window

    def check(self, login: str):
        """(True, 0.0) when allowed, else (False, unix time the lock expires)."""
        now = self.clock()
        window = self._prune(login, now)
        if len(window) < self.max_attempts:
            return True, 0.0
        return False, window[0] + self.lockout

    def record_failure(self, login: str) -> None:
        self._prune(login, self.clock()).append(self.clock())

    def reset(self, login: str) -> None:
        self._failures.pop(login, None)

    def failures(self, login: str) -> int:
        return len(self._prune(login, self.clock()))
