// Browser entry point. Kept separate so tests can import app.js without
// triggering a mount.
import { boot } from './app.js';

void boot();
