# MIT License
#
# Copyright (c) 2021 The graspwire developers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

import functools
import logging
import time

LOGGER = logging.getLogger(__name__)


def micros():
    """return a timestamp in microseconds (us)"""
    return time.perf_counter_ns() * 1e-3


def millis():
    """return a timestamp in milliseconds (ms)"""
    return time.perf_counter_ns() * 1e-6


class TimerUS(object):
    def __init__(self):
        self.start = 0
        self.reset()

    def reset(self):
        self.start = micros()

    @property
    def elapsed(self):
        return max(0.0, micros() - self.start)


class TimerMS(object):
    def __init__(self):
        self.start = 0
        self.reset()

    def reset(self):
        self.start = millis()

    @property
    def elapsed(self):
        return max(0.0, millis() - self.start)


def function_timer(func):
    """Log the wall time of every call to `func` at debug level."""

    @functools.wraps(func)
    def _wrapper(*args, **kwargs):
        timer = TimerUS()
        res = func(*args, **kwargs)

        if LOGGER.isEnabledFor(logging.DEBUG):
            LOGGER.debug('%s: %.0f us', func.__qualname__, timer.elapsed)

        return res

    return _wrapper
