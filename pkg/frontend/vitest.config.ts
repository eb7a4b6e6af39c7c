import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // The round-trip file drives a live service process; keep its tests and
    // hooks from tripping the default clocks.
    testTimeout: 20000,
    hookTimeout: 90000,
    // One service process is shared within each file, so files must not
    // interleave on the same session.
    fileParallelism: false,
  },
});
