"""Cluster builders shared across test modules."""

from rl_balance.engine import ServerSpec


def uniform_cluster(n, speed=1.0, slots=1):
    return [ServerSpec(server_id=i, speed=speed, slots=slots, weight=1.0) for i in range(n)]


def mixed_cluster():
    # desk-scale shape: three slow, two mid, one fast
    speeds = [1.0, 1.0, 1.0, 2.0, 2.0, 4.0]
    return [ServerSpec(server_id=i, speed=v, slots=1, weight=v) for i, v in enumerate(speeds)]
