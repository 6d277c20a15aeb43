from errors import UsageError

DEFAULT_SEED_COUNT = 16

def parse_seeds(text: str | None) -> list[int]:
    """
    Parses a seed specification from the command line.

    Accepts a count ("16" means seeds 0-15), a comma-separated list ("0,3,7")
    or an inclusive range ("0-15"). None gives the default 16 seeds.

    Raises:
        UsageError: If the text is not one of those forms.
    """
    if text is None:
        return list(range(DEFAULT_SEED_COUNT))
    text = text.strip()
    try:
        if "," in text:
            return [int(part) for part in text.split(",") if part.strip()]
        if "-" in text[1:]:
            start, end = text.split("-", 1)
            first, last = int(start), int(end)
            if last < first:
                raise UsageError(f"Seed range {text} is empty")
            return list(range(first, last + 1))
        count = int(text)
    except UsageError:
        raise
    except ValueError as e:
        raise UsageError(f"Invalid seeds '{text}': expected a count, a list or a range") from e
    if count < 0:
        raise UsageError(f"Seed count must be non-negative, got {count}")
    return list(range(count))
