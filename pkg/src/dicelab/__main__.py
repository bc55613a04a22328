"""Allow `python -m dicelab`."""

from .cli import entrypoint

if __name__ == "__main__":
    entrypoint()
