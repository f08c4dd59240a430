from setuptools import setup

setup(
    name="NullRig",
    version="0.1.0",
    py_modules=["cli"],
    packages=["core", "integrations", "utils"],
    install_requires=[
        "numpy>=1.24.0",
        "python-dotenv>=1.0.0",
        "tqdm>=4.66.1",
        "jsonschema>=4.17.0",
    ],
    data_files=[("docs", ["docs/report_schema.json"])],
    entry_points={
        "console_scripts": [
            "nullrig=cli:main",
        ],
    },
    python_requires=">=3.8",
)
