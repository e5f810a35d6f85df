import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    testTimeout: 20000,
    hookTimeout: 90000,
    // the roundtrip suite drives one shared live service; keep files serial
    fileParallelism: false,
  },
});
