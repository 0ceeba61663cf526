import { boot } from "./app.js";

boot(document.getElementById("app") as HTMLElement);
