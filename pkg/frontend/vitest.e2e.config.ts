import { defineConfig } from "vitest/config";

// End-to-end run against a spawned gateway process; needs the Python
// package installed (`pip install -e .` from the repository root).
export default defineConfig({
  test: {
    environment: "node",
    include: ["e2e/**/*.test.ts"],
    testTimeout: 120_000,
    hookTimeout: 120_000,
    fileParallelism: false,
  },
});
