#!/usr/bin/env python3
import os
import json
import subprocess
import sys
import time
import tempfile

from core.catalog import catalog

BUDGET_SECONDS = 60

# Colors for terminal output
class Colors:
    HEADER = '\033[95m'
    GREEN = '\033[92m'
    YELLOW = '\033[93m'
    RED = '\033[91m'
    ENDC = '\033[0m'
    BOLD = '\033[1m'
    UNDERLINE = '\033[4m'

def run_nullrig(example_id, temp_dir):
    """Run `nullrig check` on one example and parse the report"""
    output_file = os.path.join(temp_dir, f"{example_id}.json")

    try:
        start_time = time.time()
        completed = subprocess.run(
            [sys.executable, "cli.py", "check", "--example", example_id, "--format", "json",
             "--report", output_file, "--no-timestamp", "--quiet"],
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            timeout=BUDGET_SECONDS * 5
        )
        execution_time = time.time() - start_time

        if completed.returncode not in (0, 1):
            print(f"{Colors.RED}Error checking {example_id}: exit code {completed.returncode}{Colors.ENDC}")
            print(f"stderr: {completed.stderr.decode() if completed.stderr else 'None'}")
            return None, execution_time

        with open(output_file, "r") as f:
            results = json.load(f)

        return results, execution_time
    except subprocess.TimeoutExpired:
        print(f"{Colors.YELLOW}Timeout checking {example_id} (exceeded {BUDGET_SECONDS * 5} seconds){Colors.ENDC}")
        return None, BUDGET_SECONDS * 5
    except Exception as e:
        print(f"{Colors.RED}Unexpected error checking {example_id}: {e}{Colors.ENDC}")
        return None, 0

def benchmark():
    """Time a full check of every supported catalog example against the desk-scale budget"""
    examples = [entry.id for entry in catalog() if entry.supported]
    print(f"{Colors.HEADER}Found {len(examples)} examples to check.{Colors.ENDC}")

    results = {}
    total_time = 0
    over_budget = 0
    errors = 0

    # Examples run one at a time so each timing is the cost of one check
    with tempfile.TemporaryDirectory() as temp_dir:
        print(f"{Colors.HEADER}Starting checks...{Colors.ENDC}")
        for index, example_id in enumerate(examples, start=1):
            report, execution_time = run_nullrig(example_id, temp_dir)
            total_time += execution_time

            if report is None:
                status = f"{Colors.RED}ERROR{Colors.ENDC}"
                errors += 1
            elif report["status"] == "pass":
                status = f"{Colors.GREEN}PASS{Colors.ENDC}"
            else:
                status = f"{Colors.RED}FAIL{Colors.ENDC}"

            within = execution_time <= BUDGET_SECONDS
            if not within:
                over_budget += 1
            budget = f"{Colors.GREEN}within budget{Colors.ENDC}" if within else f"{Colors.YELLOW}OVER BUDGET{Colors.ENDC}"

            results[example_id] = {
                "status": report["status"] if report else "error",
                "execution_time": execution_time,
                "within_budget": within,
                "summary": report["summary"] if report else None,
            }

            print(f"[{index}/{len(examples)}] {example_id}: {status} in {execution_time:.2f}s ({budget})")

    print(f"\n{Colors.HEADER}{Colors.BOLD}Benchmark Results:{Colors.ENDC}")
    print(f"{Colors.BOLD}Total examples:{Colors.ENDC} {len(examples)}")
    print(f"{Colors.YELLOW}{Colors.BOLD}Over the {BUDGET_SECONDS}s budget:{Colors.ENDC} {over_budget}")
    if errors > 0:
        print(f"{Colors.RED}{Colors.BOLD}Errors:{Colors.ENDC} {errors}")
    print(f"{Colors.BOLD}Total check time:{Colors.ENDC} {total_time:.2f}s")
    print(f"{Colors.BOLD}Average time per example:{Colors.ENDC} {total_time/max(len(examples), 1):.2f}s")

    # Save detailed results to a file
    with open("benchmark_results.json", "w") as f:
        json.dump({
            "summary": {
                "total_examples": len(examples),
                "over_budget": over_budget,
                "errors": errors,
                "budget_seconds": BUDGET_SECONDS,
                "total_time": total_time,
                "average_time_per_example": total_time/max(len(examples), 1)
            },
            "example_results": results
        }, f, indent=2)

    print(f"\nDetailed results saved to {Colors.UNDERLINE}benchmark_results.json{Colors.ENDC}")

if __name__ == "__main__":
    benchmark()
