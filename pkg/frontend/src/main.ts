import { ApiClient } from './api.js';
import { App } from './app.js';

document.addEventListener('DOMContentLoaded', () => {
  const mount = document.getElementById('app');
  if (!mount) throw new Error('missing #app mount point');
  void new App(new ApiClient(''), mount).boot();
});
