import shortuuid

RUN_ID_LENGTH = 8


def generate_run_id(prefix: str = "run") -> str:
    """
    Short random identifier tagging the CSV files and logs of one run, e.g. "bench-3kq9x2ab".
    """
    _prefix = prefix.replace("_", "-").replace(".", "-").lower()
    return f"{_prefix}-{shortuuid.ShortUUID().random(length=RUN_ID_LENGTH).lower()}"
