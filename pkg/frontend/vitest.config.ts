import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    globalSetup: "./test/globalSetup.ts",
    include: ["test/**/*.test.ts"],
    testTimeout: 30000,
    hookTimeout: 180000,
  },
});
