"""SplitMix64, the only source of randomness in the package.

Plain Python integers are used throughout so the stream is identical on every
platform and easy to port.
"""

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(z):
    """SplitMix64 output finalizer."""
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def stream_seed(seed, index):
    """Seed of the ``index``-th independent substream of ``seed``.

    This is the ``index + 1``-th output of ``SplitMix64(seed)``, computed in
    O(1), so substreams can be created in any order.
    """
    return mix64((seed + GOLDEN_GAMMA * (index + 1)) & MASK64)


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed):
        self.state = int(seed) & MASK64

    def next_u64(self):
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def below(self, n):
        """Integer in ``[0, n)`` as ``next mod n``; modulo bias is accepted."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def randint(self, lo, hi):
        """Integer in the closed range ``[lo, hi]``."""
        return lo + self.below(hi - lo + 1)

    def random(self):
        """Float in ``[0, 1)`` from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def sample(self, n, k):
        """``k`` distinct integers from ``range(n)`` by partial Fisher-Yates.

        Swaps are tracked in a dict so the cost is O(k) even for huge ``n``.
        """
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        swapped = {}
        out = []
        for i in range(k):
            j = i + self.below(n - i)
            vi = swapped.get(i, i)
            vj = swapped.get(j, j)
            swapped[j] = vi
            out.append(vj)
        return out
