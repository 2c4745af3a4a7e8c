"""Console entry point: python main.py <command> [options]."""
from cli import app

if __name__ == "__main__":
    app()
