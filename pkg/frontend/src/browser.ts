/** Browser entry point: boot the app against the same origin. */

import { initApp } from "./main.js";

document.addEventListener("DOMContentLoaded", () => {
  initApp(document, { baseUrl: "" });
});
