"""Entry point for labgan when run as a module."""

from .cli.main import run

if __name__ == "__main__":
    run()
