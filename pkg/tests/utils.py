import pytest


def cases(params_str: str, *params_defs):
    """`pytest.mark.parametrize` with a readable id per case.

    >>> @cases(
    >>>     "ground,davenport",
    >>>     ["symmetric", ["[-2,-1,1,2]", 3]],
    >>>     ["single negative", ["[-3,2]", 5]],
    >>> )
    >>> def test_davenport(ground, davenport):
    >>>     ...

    shows up as `test_davenport[symmetric]` and `test_davenport[single negative]`.
    """
    test_names = [name for name, _ in params_defs]
    test_params = [params for _, params in params_defs]
    if "," not in params_str:
        # pytest does not unpack a single argument name; accept `[value]` too.
        test_params = [
            params[0] if isinstance(params, list) and len(params) == 1 else params
            for params in test_params
        ]

    def wrapper(func):
        return pytest.mark.parametrize(params_str, test_params, ids=test_names)(func)

    return wrapper
