import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    environment: 'jsdom',
    include: ['tests/**/*.test.ts'],
    // the workflow test boots the curation service in a child process
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
