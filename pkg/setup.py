"""
    Setup file for gdlkit
    Finds pyproject.toml to determine build system
    and configures setup using setup.cfg
"""
from setuptools import setup


if __name__ == "__main__":
    try:
        setup()
    except:  # noqa
        print(
            "\n\nAn error occurred while building the project, "
            "please ensure you have the most updated version of setuptools "
            "and wheel with:\n"
            "   pip install -U setuptools wheel\n\n"
        )
        raise
