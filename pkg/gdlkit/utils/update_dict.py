import collections.abc


def update_dict(d, u):
    """Merge u into d recursively; None values in u leave d untouched"""
    for k, v in u.items():
        if isinstance(v, collections.abc.Mapping):
            d[k] = update_dict(d.get(k) or dict(), v)
        elif v is not None:
            d[k] = v
    return d
